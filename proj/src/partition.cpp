// SPDX-License-Identifier: Apache-2.0
#include "lbdem/partition.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lbdem::partition {

int BlockDecomposition::block_of_position(const Vec3& x) const {
    Vec3i coord;
    for (int a = 0; a < 3; ++a) {
        const int cells_per_block = domain[a] / grid[a];
        int c = static_cast<int>(std::floor(x[a])) / cells_per_block;
        coord[a] = std::clamp(c, 0, grid[a] - 1);
    }
    return block_index(coord);
}

int BlockDecomposition::partner_count(int block) const {
    std::set<int> partners;
    for (const NeighborInfo& n : blocks[block].neighbors)
        if (n.block != block) partners.insert(n.block);
    return static_cast<int>(partners.size());
}

BlockDecomposition decompose(const Vec3i& domain, const Vec3i& grid,
                             const std::array<bool, 3>& periodic, int workers) {
    for (int a = 0; a < 3; ++a) {
        if (grid[a] < 1) throw ConfigError("block grid must be positive in every axis");
        if (domain[a] % grid[a] != 0)
            throw ConfigError("block grid does not divide the domain evenly in axis " +
                              std::to_string(a) + " (" + std::to_string(domain[a]) + " / " +
                              std::to_string(grid[a]) + ")");
    }
    if (workers < 1) throw ConfigError("worker count must be >= 1");

    BlockDecomposition d;
    d.domain = domain;
    d.grid = grid;
    d.periodic = periodic;
    const int n_blocks = grid.x * grid.y * grid.z;
    d.workers = std::min(workers, n_blocks);

    const Vec3i ext{domain.x / grid.x, domain.y / grid.y, domain.z / grid.z};

    for (int bz = 0; bz < grid.z; ++bz)
        for (int by = 0; by < grid.y; ++by)
            for (int bx = 0; bx < grid.x; ++bx) {
                BlockDecomposition::BlockInfo info;
                info.coord = {bx, by, bz};
                info.id = d.block_index(info.coord);
                info.box = {{bx * ext.x, by * ext.y, bz * ext.z},
                            {(bx + 1) * ext.x, (by + 1) * ext.y, (bz + 1) * ext.z}};
                info.worker = info.id % d.workers;

                for (int a = 0; a < 3; ++a) {
                    info.domain_faces[2 * a] = info.coord[a] == 0;
                    info.domain_faces[2 * a + 1] = info.coord[a] == grid[a] - 1;
                }

                for (int oz = -1; oz <= 1; ++oz)
                    for (int oy = -1; oy <= 1; ++oy)
                        for (int ox = -1; ox <= 1; ++ox) {
                            const Vec3i off{ox, oy, oz};
                            if (off == Vec3i{0, 0, 0}) continue;
                            Vec3i nc = info.coord + off;
                            bool valid = true;
                            for (int a = 0; a < 3; ++a) {
                                if (nc[a] < 0 || nc[a] >= grid[a]) {
                                    if (periodic[a])
                                        nc[a] = (nc[a] + grid[a]) % grid[a];
                                    else
                                        valid = false;
                                }
                            }
                            if (!valid) continue;
                            info.neighbors.push_back({d.block_index(nc), off});
                        }
                d.blocks.push_back(std::move(info));
            }
    return d;
}

std::size_t message_bytes(const SyncMessage& msg) {
    // Modeled wire sizes: 8 B per scalar, 4 B per id, 1 B per flag.
    struct Visitor {
        std::size_t operator()(const std::vector<PdfSlab>& v) const {
            std::size_t n = 0;
            for (const PdfSlab& s : v) n += s.values.size() * 8 + 24;
            return n;
        }
        std::size_t operator()(const std::vector<VelocityRecord>& v) const {
            return v.size() * (4 + 6 * 8);
        }
        std::size_t operator()(const ParticleSyncPayload& p) const {
            return p.states.size() * (4 + 2 + 20 * 8) + p.histories.size() * (8 + 4 * 8);
        }
        std::size_t operator()(const std::vector<psm::HydroPartial>& v) const {
            return v.size() * (4 + 12 * 8);
        }
        std::size_t operator()(const std::vector<ForcePartialRecord>& v) const {
            return v.size() * (4 + 6 * 8);
        }
        std::size_t operator()(const std::vector<HistoryRecord>& v) const {
            return v.size() * (8 + 4 * 8);
        }
    };
    return std::visit(Visitor{}, msg.payload);
}

void MessageBus::post(SyncMessage&& msg) {
    const std::size_t bytes = message_bytes(msg);
    const MsgKind kind = msg.kind;
    {
        std::lock_guard<std::mutex> lock(mutexes_[msg.dst]);
        for (const SyncMessage& m : boxes_[msg.dst])
            if (m.kind == msg.kind && m.src == msg.src && m.step == msg.step &&
                m.subcycle == msg.subcycle)
                throw SyncError("duplicate message (src " + std::to_string(msg.src) +
                                ", dst " + std::to_string(msg.dst) + ", kind " +
                                std::to_string(static_cast<int>(msg.kind)) + ")");
        boxes_[msg.dst].push_back(std::move(msg));
    }
    std::lock_guard<std::mutex> lock(stats_mutex_);
    bytes_[static_cast<int>(kind)] += bytes;
    ++messages_;
}

std::vector<SyncMessage> MessageBus::collect(int dst, MsgKind kind) {
    std::vector<SyncMessage> out;
    {
        std::lock_guard<std::mutex> lock(mutexes_[dst]);
        auto& box = boxes_[dst];
        for (auto it = box.begin(); it != box.end();) {
            if (it->kind == kind) {
                out.push_back(std::move(*it));
                it = box.erase(it);
            } else {
                ++it;
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const SyncMessage& a, const SyncMessage& b) { return a.src < b.src; });
    return out;
}

ThreadPoolScheduler::ThreadPoolScheduler(int workers) {
    if (workers < 1) throw ConfigError("thread pool needs at least one worker");
    threads_.reserve(workers);
    for (int w = 0; w < workers; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

ThreadPoolScheduler::~ThreadPoolScheduler() {
    {
        std::lock_guard<std::mutex> lock(m_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& t : threads_) t.join();
}

void ThreadPoolScheduler::run_phase(int n_blocks, const std::function<void(int)>& fn) {
    std::unique_lock<std::mutex> lock(m_);
    fn_ = &fn;
    n_blocks_ = n_blocks;
    remaining_ = static_cast<int>(threads_.size());
    ++epoch_;
    cv_work_.notify_all();
    cv_main_.wait(lock, [this] { return remaining_ == 0; });
    fn_ = nullptr;
    if (error_) {
        std::exception_ptr e = error_;
        error_ = nullptr;
        std::rethrow_exception(e);
    }
}

void ThreadPoolScheduler::worker_loop(int w) {
    long seen = 0;
    for (;;) {
        const std::function<void(int)>* fn;
        int n_blocks;
        {
            std::unique_lock<std::mutex> lock(m_);
            cv_work_.wait(lock, [&] { return stop_ || epoch_ > seen; });
            if (stop_) return;
            seen = epoch_;
            fn = fn_;
            n_blocks = n_blocks_;
        }
        std::exception_ptr err;
        try {
            const int nw = static_cast<int>(threads_.size());
            for (int b = w; b < n_blocks; b += nw) (*fn)(b);
        } catch (...) {
            err = std::current_exception();
        }
        {
            std::lock_guard<std::mutex> lock(m_);
            if (err && !error_) error_ = err;
            if (--remaining_ == 0) cv_main_.notify_one();
        }
    }
}

std::string CommVolumeReport::to_table() const {
    std::ostringstream os;
    os << "metric\tvalue\n";
    os << "max_bytes_per_sync\t" << max_bytes << '\n';
    os << "avg_bytes_per_sync\t" << avg_bytes << '\n';
    os << "max_partners\t" << max_partners << '\n';
    return os.str();
}

CommVolumeReport comm_volume_report(const BlockDecomposition& decomp,
                                    const std::vector<dem::Particle>& particles,
                                    double ghost_margin) {
    const std::size_t state_bytes = 4 + 2 + 20 * 8;  // one StateRecord
    const int nb = static_cast<int>(decomp.blocks.size());
    std::vector<std::size_t> per_block(nb, 0);

    for (const dem::Particle& p : particles) {
        const int owner = decomp.block_of_position(p.x);
        for (const NeighborInfo& n : decomp.blocks[owner].neighbors) {
            if (n.block == owner) continue;
            const CellBox& box = decomp.blocks[n.block].box;
            double d2 = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double lo = box.lo[a], hi = box.hi[a];
                const double v = p.x[a] < lo ? lo - p.x[a] : (p.x[a] > hi ? p.x[a] - hi : 0.0);
                d2 += v * v;
            }
            const double reach = p.r + ghost_margin;
            if (d2 <= reach * reach) {
                per_block[owner] += state_bytes;    // sent
                per_block[n.block] += state_bytes;  // received
            }
        }
    }

    CommVolumeReport r;
    double sum = 0.0;
    for (int b = 0; b < nb; ++b) {
        r.max_bytes = std::max(r.max_bytes, per_block[b]);
        sum += static_cast<double>(per_block[b]);
        r.max_partners = std::max(r.max_partners, decomp.partner_count(b));
    }
    r.avg_bytes = nb > 0 ? sum / nb : 0.0;
    return r;
}

}  // namespace lbdem::partition
