// SPDX-License-Identifier: Apache-2.0
#include "lbdem/sim.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lbdem {

using partition::MsgKind;
using partition::SyncMessage;
using perf::Category;
using perf::ScopedTimer;

BlockState::BlockState(int id_, const CellBox& box_, bool coupling)
    : id(id_),
      box(box_),
      field(box_.hi.x - box_.lo.x, box_.hi.y - box_.lo.y, box_.hi.z - box_.lo.z) {
    if (coupling) {
        const Vec3i d = dims();
        frac.resize(d.x, d.y, d.z);
        svel.resize(frac.cells());
        scratch.resize(frac.cells());
    }
}

int BlockState::find_particle(int pid) const {
    auto it = std::lower_bound(particles.begin(), particles.end(), pid,
                               [](const dem::Particle& p, int v) { return p.id < v; });
    if (it == particles.end() || it->id != pid) return -1;
    return static_cast<int>(it - particles.begin());
}

dem::Particle* BlockState::particle(int pid) {
    const int i = find_particle(pid);
    return i < 0 ? nullptr : &particles[i];
}

Simulation::Simulation(partition::BlockDecomposition decomp, const SimParams& params,
                       std::unique_ptr<partition::Scheduler> scheduler)
    : decomp_(std::move(decomp)),
      params_(params),
      bus_(static_cast<int>(decomp_.blocks.size())),
      scheduler_(std::move(scheduler)) {
    params_.fluid.validate();
    params_.bc.validate();
    params_.dem.validate();
    for (const auto& info : decomp_.blocks) {
        blocks_.push_back(std::make_unique<BlockState>(info.id, info.box, params_.coupling));
        blocks_.back()->domain_faces = info.domain_faces;
    }
}

void Simulation::initialize_fluid(double rho, const Vec3& u) {
    const auto feq = lbm::equilibrium(rho, u);
    for (auto& blk : blocks_) blk->field.fill_src(feq);
}

void Simulation::set_walls(std::vector<dem::WallPlane> walls) { walls_ = std::move(walls); }

double Simulation::ghost_margin() const {
    const double cutoff =
        params_.dem.lubrication ? dem::DemParams::lub_cutoff(0.5 * r_max_) : 0.0;
    return r_max_ + cutoff;
}

void Simulation::add_particles(const std::vector<dem::Particle>& particles) {
    for (const dem::Particle& p : particles) {
        r_max_ = std::max(r_max_, p.r);
        const int owner = decomp_.block_of_position(p.x);
        dem::Particle local = p;
        local.ghost = false;
        auto& vec = blocks_[owner]->particles;
        auto it = std::lower_bound(vec.begin(), vec.end(), local.id,
                                   [](const dem::Particle& a, int v) { return a.id < v; });
        if (it != vec.end() && it->id == local.id)
            throw ConfigError("duplicate particle id " + std::to_string(local.id));
        vec.insert(it, local);
        any_particles_ = true;
    }
    // The ghost reach must not span past a direct neighbor. With two blocks
    // per axis every block is a neighbor, so only finer grids constrain it.
    if (any_particles_) {
        const double reach = r_max_ + ghost_margin();
        for (int a = 0; a < 3; ++a) {
            const int ext = decomp_.domain[a] / decomp_.grid[a];
            if (decomp_.grid[a] >= 3 && reach > ext)
                throw ConfigError("ghost reach " + std::to_string(reach) +
                                  " exceeds the block extent " + std::to_string(ext) +
                                  " in axis " + std::to_string(a));
        }
    }
    establish_ghosts();
}

bool Simulation::ghost_eligible(const dem::Particle& p, int b) const {
    const CellBox& box = decomp_.blocks[b].box;
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = box.lo[a], hi = box.hi[a];
        const double v = p.x[a] < lo ? lo - p.x[a] : (p.x[a] > hi ? p.x[a] - hi : 0.0);
        d2 += v * v;
    }
    const double reach = p.r + ghost_margin();
    return d2 <= reach * reach;
}

std::vector<int> Simulation::neighbor_blocks(const BlockState& blk) const {
    std::set<int> ids;
    for (const auto& n : decomp_.blocks[blk.id].neighbors)
        if (n.block != blk.id) ids.insert(n.block);
    return {ids.begin(), ids.end()};
}

// ---------------------------------------------------------------------------
// Halo exchange

namespace {

CellBox source_slab(const Vec3i& dims, const Vec3i& off) {
    CellBox b;
    for (int a = 0; a < 3; ++a) {
        if (off[a] == 1) {
            b.lo[a] = dims[a] - 1;
            b.hi[a] = dims[a];
        } else if (off[a] == -1) {
            b.lo[a] = 0;
            b.hi[a] = 1;
        } else {
            b.lo[a] = 0;
            b.hi[a] = dims[a];
        }
    }
    return b;
}

CellBox ghost_region(const Vec3i& dims, const Vec3i& dir) {
    CellBox b;
    for (int a = 0; a < 3; ++a) {
        if (dir[a] == 1) {
            b.lo[a] = dims[a];
            b.hi[a] = dims[a] + 1;
        } else if (dir[a] == -1) {
            b.lo[a] = -1;
            b.hi[a] = 0;
        } else {
            b.lo[a] = 0;
            b.hi[a] = dims[a];
        }
    }
    return b;
}

}  // namespace

void Simulation::begin_halo_exchange(int b) {
    BlockState& blk = *blocks_[b];
    const Vec3i dims = blk.dims();
    std::map<int, std::vector<partition::PdfSlab>> per_dst;

    for (const auto& n : decomp_.blocks[b].neighbors) {
        const CellBox src = source_slab(dims, n.offset);
        partition::PdfSlab slab;
        slab.dir = Vec3i{} - n.offset;
        slab.extent = src.hi - src.lo;
        slab.values.reserve(static_cast<std::size_t>(src.volume()) * lbm::kQ);
        for (int q = 0; q < lbm::kQ; ++q) {
            const double* p = blk.field.src(q);
            for (int k = src.lo.z; k < src.hi.z; ++k)
                for (int j = src.lo.y; j < src.hi.y; ++j)
                    for (int i = src.lo.x; i < src.hi.x; ++i)
                        slab.values.push_back(p[blk.field.idx(i, j, k)]);
        }
        per_dst[n.block].push_back(std::move(slab));
    }
    for (auto& [dst, slabs] : per_dst)
        bus_.post({MsgKind::kPdfHalo, b, dst, step_, -1, std::move(slabs)});
    blk.halo_pending = true;
}

void Simulation::complete_halo_exchange(int b) {
    BlockState& blk = *blocks_[b];
    if (!blk.halo_pending) throw SyncError("halo completion without a pending exchange");
    const Vec3i dims = blk.dims();

    for (SyncMessage& msg : bus_.collect(b, MsgKind::kPdfHalo)) {
        for (const partition::PdfSlab& slab :
             std::get<std::vector<partition::PdfSlab>>(msg.payload)) {
            const CellBox dst = ghost_region(dims, slab.dir);
            std::size_t v = 0;
            for (int q = 0; q < lbm::kQ; ++q) {
                double* p = blk.field.src(q);
                for (int k = dst.lo.z; k < dst.hi.z; ++k)
                    for (int j = dst.lo.y; j < dst.hi.y; ++j)
                        for (int i = dst.lo.x; i < dst.hi.x; ++i)
                            p[blk.field.idx(i, j, k)] = slab.values[v++];
            }
        }
    }
    blk.halo_pending = false;
}

// ---------------------------------------------------------------------------
// Coupling phases

void Simulation::build_snapshots(BlockState& blk) {
    blk.snapshots.clear();
    blk.snapshots.reserve(blk.particles.size());
    for (const dem::Particle& p : blk.particles) {
        psm::ParticleSnapshot s;
        s.id = p.id;
        s.x = p.x;
        s.r = p.r;
        s.f_r = psm::f_of_r(p.r);
        s.u = p.u;
        s.omega = p.w;
        blk.snapshots.push_back(s);
    }
}

void Simulation::run_kernel(BlockState& blk, const CellBox& range) {
    if (range.empty()) return;
    if (params_.coupling) {
        if (params_.kernels == KernelMode::openmp)
            psm::psm_collide_stream_omp(blk.field, params_.fluid, blk.frac, blk.svel,
                                        blk.scratch, range);
        else
            psm::psm_collide_stream_serial(blk.field, params_.fluid, blk.frac, blk.svel,
                                           blk.scratch, range);
    } else {
        if (params_.kernels == KernelMode::openmp)
            lbm::collide_stream_omp(blk.field, params_.fluid, range);
        else
            lbm::collide_stream_serial(blk.field, params_.fluid, range);
    }
}

void Simulation::post_velocity_sync(BlockState& blk) {
    std::map<int, std::vector<partition::VelocityRecord>> per_dst;
    for (int nb : neighbor_blocks(blk))
        for (const dem::Particle& p : blk.particles) {
            if (p.ghost) continue;
            if (ghost_eligible(p, nb)) per_dst[nb].push_back({p.id, p.u, p.w});
        }
    for (auto& [dst, records] : per_dst)
        bus_.post({MsgKind::kVelocitySync, blk.id, dst, step_, -1, std::move(records)});
}

void Simulation::apply_velocity_sync(BlockState& blk) {
    for (SyncMessage& msg : bus_.collect(blk.id, MsgKind::kVelocitySync)) {
        for (const auto& rec : std::get<std::vector<partition::VelocityRecord>>(msg.payload)) {
            dem::Particle* p = blk.particle(rec.id);
            if (p == nullptr || !p->ghost)
                throw SyncError("velocity update for unknown ghost id " +
                                std::to_string(rec.id));
            p->u = rec.u;
            p->w = rec.w;
            // Patch the kernel snapshot built before the sync arrived.
            for (auto& s : blk.snapshots)
                if (s.id == rec.id) {
                    s.u = rec.u;
                    s.omega = rec.w;
                    break;
                }
        }
    }
}

void Simulation::phase_post_and_map(int b) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPsmComm);
        begin_halo_exchange(b);
    }
    if (params_.coupling) {
        ScopedTimer t(blk.timings, Category::kMapping);
        build_snapshots(blk);
        blk.registry.build(blk.box, blk.snapshots, params_.subdivisions);
        psm::build_fraction_field(blk.frac, blk.box, blk.registry, blk.snapshots,
                                  params_.kernels == KernelMode::openmp);
    }
    {
        ScopedTimer t(blk.timings, Category::kPdComm);
        post_velocity_sync(blk);
    }
}

void Simulation::phase_setu_inner(int b) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPdComm);
        apply_velocity_sync(blk);
    }
    if (params_.coupling) {
        ScopedTimer t(blk.timings, Category::kSetU);
        psm::set_solid_velocities(blk.svel, blk.frac, blk.box, blk.snapshots,
                                  params_.kernels == KernelMode::openmp);
    }
    {
        ScopedTimer t(blk.timings, Category::kPsm);
        const Vec3i d = blk.dims();
        run_kernel(blk, {{1, 1, 1}, {d.x - 1, d.y - 1, d.z - 1}});
    }
}

void Simulation::phase_outer_reduce(int b) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPsmComm);
        complete_halo_exchange(b);
    }
    lbm::apply_boundaries(blk.field, params_.bc, blk.domain_faces);
    {
        ScopedTimer t(blk.timings, Category::kPsm);
        for (const CellBox& box : boundary_shell(blk.dims())) run_kernel(blk, box);
    }
    blk.field.swap();

    if (!params_.coupling) return;
    ScopedTimer t(blk.timings, Category::kRedF);
    auto partials = psm::finalize_hydro_forces(blk.frac, blk.scratch, blk.box, blk.snapshots);
    blk.own_partials.clear();
    std::map<int, std::vector<psm::HydroPartial>> per_dst;
    for (const psm::HydroPartial& p : partials) {
        const dem::Particle* part = blk.particle(p.id);
        if (part == nullptr)
            throw SyncError("hydrodynamic partial for unknown particle id " +
                            std::to_string(p.id));
        const int owner =
            !part->ghost ? blk.id : decomp_.block_of_position(part->x);
        if (owner == blk.id)
            blk.own_partials.push_back(p);
        else
            per_dst[owner].push_back(p);
    }
    for (auto& [dst, records] : per_dst)
        bus_.post({MsgKind::kHydroPartials, blk.id, dst, step_, -1, std::move(records)});
}

void Simulation::phase_apply_hydro(int b) {
    BlockState& blk = *blocks_[b];
    if (!params_.coupling) return;
    ScopedTimer t(blk.timings, Category::kRedF);

    // Partials indexed (source block, particle id); summed in ascending
    // block-id order so the reduction is independent of arrival order.
    std::vector<std::pair<int, const psm::HydroPartial*>> all;
    for (const auto& p : blk.own_partials) all.emplace_back(blk.id, &p);
    auto msgs = bus_.collect(blk.id, MsgKind::kHydroPartials);
    for (const SyncMessage& msg : msgs)
        for (const auto& p : std::get<std::vector<psm::HydroPartial>>(msg.payload))
            all.emplace_back(msg.src, &p);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b2) {
        if (a.second->id != b2.second->id) return a.second->id < b2.second->id;
        return a.first < b2.first;
    });

    for (dem::Particle& p : blk.particles)
        if (!p.ghost) {
            p.f_hydro = Vec3{};
            p.t_hydro = Vec3{};
        }

    std::size_t i = 0;
    while (i < all.size()) {
        const int id = all[i].second->id;
        CompensatedVec3 f, tq;
        std::size_t j = i;
        for (; j < all.size() && all[j].second->id == id; ++j) {
            const psm::HydroPartial& hp = *all[j].second;
            f.add(hp.f);
            f.x.comp += hp.f_comp.x;
            f.y.comp += hp.f_comp.y;
            f.z.comp += hp.f_comp.z;
            tq.add(hp.t);
            tq.x.comp += hp.t_comp.x;
            tq.y.comp += hp.t_comp.y;
            tq.z.comp += hp.t_comp.z;
        }
        dem::Particle* part = blk.particle(id);
        if (part == nullptr || part->ghost)
            throw SyncError("hydrodynamic partial reduced for non-local particle id " +
                            std::to_string(id));
        part->f_hydro = f.value();
        part->t_hydro = tq.value();
        i = j;
    }
}

// ---------------------------------------------------------------------------
// Particle sub-cycle phases

void Simulation::post_particle_sync(BlockState& blk, int s) {
    partition::ParticleSyncPayload empty;
    std::map<int, partition::ParticleSyncPayload> per_dst;
    const auto neighbors = neighbor_blocks(blk);

    for (const dem::Particle& p : blk.particles) {
        if (p.ghost) continue;
        const int owner = decomp_.block_of_position(p.x);

        partition::StateRecord rec;
        rec.id = p.id;
        rec.fixed = p.fixed;
        rec.r = p.r;
        rec.m = p.m;
        rec.x = p.x;
        rec.u = p.u;
        rec.w = p.w;
        rec.f_old = p.f_old;
        rec.t_old = p.t_old;
        rec.f_new = p.f_new;
        rec.t_new = p.t_new;
        rec.f_hydro = p.f_hydro;
        rec.t_hydro = p.t_hydro;

        if (owner != blk.id) {
            const bool neighbor =
                std::find(neighbors.begin(), neighbors.end(), owner) != neighbors.end();
            if (!neighbor)
                throw SyncError("particle id " + std::to_string(p.id) +
                                " moved farther than one block in one sub-cycle");
            rec.migrate = true;
            auto& payload = per_dst[owner];
            payload.states.push_back(rec);
            for (const auto& [key, state] : blk.history.entries())
                if (key.first == p.id || key.second == p.id)
                    payload.histories.push_back(
                        {key.first, key.second, state.delta_t, state.t_impact});
        }
        rec.migrate = false;
        for (int nb : neighbors) {
            if (nb == owner && owner != blk.id) continue;  // migration already carries it
            if (ghost_eligible(p, nb)) per_dst[nb].states.push_back(rec);
        }
    }
    for (auto& [dst, payload] : per_dst)
        bus_.post({MsgKind::kParticleSync, blk.id, dst, step_, s, std::move(payload)});
}

void Simulation::apply_particle_sync(BlockState& blk, int s) {
    std::vector<dem::Particle> next;
    next.reserve(blk.particles.size());
    for (dem::Particle& p : blk.particles) {
        if (p.ghost) continue;  // ghosts are rebuilt from this sync
        const int owner = decomp_.block_of_position(p.x);
        if (owner == blk.id) {
            next.push_back(p);
        } else if (ghost_eligible(p, blk.id)) {
            p.ghost = true;  // migrated away, keep a ghost copy
            next.push_back(p);
        }
    }

    for (SyncMessage& msg : bus_.collect(blk.id, MsgKind::kParticleSync)) {
        auto& payload = std::get<partition::ParticleSyncPayload>(msg.payload);
        for (const partition::StateRecord& rec : payload.states) {
            dem::Particle p;
            p.id = rec.id;
            p.fixed = rec.fixed;
            p.r = rec.r;
            p.m = rec.m;
            p.x = rec.x;
            p.u = rec.u;
            p.w = rec.w;
            p.f_old = rec.f_old;
            p.t_old = rec.t_old;
            p.f_new = rec.f_new;
            p.t_new = rec.t_new;
            p.f_hydro = rec.f_hydro;
            p.t_hydro = rec.t_hydro;
            if (rec.migrate) {
                if (decomp_.block_of_position(p.x) != blk.id)
                    throw SyncError("migration of particle id " + std::to_string(p.id) +
                                    " arrived at the wrong block");
                p.ghost = false;
            } else {
                p.ghost = true;
            }
            next.push_back(p);
        }
        for (const partition::HistoryRecord& hr : payload.histories) {
            auto& state = blk.history.entries()[dem::ContactHistory::make_key(hr.id_a, hr.id_b)];
            state.delta_t = hr.delta_t;
            state.t_impact = hr.t_impact;
        }
    }

    std::sort(next.begin(), next.end(),
              [](const dem::Particle& a, const dem::Particle& b2) { return a.id < b2.id; });
    for (std::size_t i = 1; i < next.size(); ++i)
        if (next[i].id == next[i - 1].id)
            throw SyncError("duplicate particle id " + std::to_string(next[i].id) +
                            " after synchronization");
    blk.particles = std::move(next);
    (void)s;
}

void Simulation::dem_pair_forces(BlockState& blk) {
    auto& P = blk.particles;
    if (P.empty()) return;
    const double margin = ghost_margin();
    const double reach = r_max_ + margin + 1.0;
    Vec3 lo{blk.box.lo.x - reach, blk.box.lo.y - reach, blk.box.lo.z - reach};
    Vec3 hi{blk.box.hi.x + reach, blk.box.hi.y + reach, blk.box.hi.z + reach};

    dem::LinkedCellGrid grid;
    grid.build(lo, hi, dem::linked_cell_edge(std::max(r_max_, 1.0), params_.dem.lubrication),
               P);

    std::vector<std::pair<int, int>> pairs;  // indices, lower id first
    grid.for_each_pair([&](int a, int b) {
        if (P[a].ghost && P[b].ghost) return;
        const double r_eff = P[a].r * P[b].r / (P[a].r + P[b].r);
        const double cutoff = params_.dem.lubrication ? dem::DemParams::lub_cutoff(r_eff) : 0.0;
        const double range = P[a].r + P[b].r + cutoff;
        if (norm2(P[b].x - P[a].x) > range * range) return;
        if (P[a].id < P[b].id)
            pairs.emplace_back(a, b);
        else
            pairs.emplace_back(b, a);
    });
    std::sort(pairs.begin(), pairs.end(), [&](const auto& u, const auto& v) {
        return std::pair{P[u.first].id, P[u.second].id} < std::pair{P[v.first].id, P[v.second].id};
    });

    const double dt_p = params_.dem.dt_p();
    const long now = step_ * params_.dem.subcycles;  // impact bookkeeping

    auto apply = [&](dem::Particle& p, const Vec3& f, const Vec3& t) {
        if (p.ghost) return;
        p.f_new += f;
        p.t_new += t;
    };

    // Lubrication pass: near pairs not yet in contact.
    if (params_.dem.lubrication) {
        for (auto [a, b] : pairs) {
            const double gap = norm(P[b].x - P[a].x) - P[a].r - P[b].r;
            if (gap <= 0.0) continue;
            const auto lf = dem::lubrication_correction(P[a], P[b], params_.dem);
            apply(P[a], lf.f_i, lf.t_i);
            apply(P[b], lf.f_j, lf.t_j);
        }
        for (dem::Particle& p : P) {
            if (p.ghost) continue;
            for (const dem::WallPlane& w : walls_) {
                const auto lf = dem::wall_lubrication_correction(p, w, params_.dem);
                apply(p, lf.f_i, lf.t_i);
            }
        }
    }

    // Contact pass with tangential history.
    for (auto [a, b] : pairs) {
        const double delta = P[a].r + P[b].r - norm(P[b].x - P[a].x);
        if (delta <= 0.0) continue;
        auto& hist = blk.history.fetch(P[a].id, P[b].id, now);
        const auto cf = dem::contact_force(P[a], P[b], params_.dem, hist, dt_p);
        apply(P[a], cf.f_i, cf.t_i);
        apply(P[b], cf.f_j, cf.t_j);
    }
    for (dem::Particle& p : P) {
        if (p.ghost) continue;
        for (const dem::WallPlane& w : walls_) {
            const double d = dot(p.x - w.point, w.normal);
            if (d >= p.r) continue;
            auto& hist = blk.history.fetch(p.id, w.id, now);
            const auto cf = dem::wall_contact_force(p, w, params_.dem, hist, dt_p);
            apply(p, cf.f_i, cf.t_i);
        }
    }
}

void Simulation::post_history_records(BlockState& blk, int s) {
    std::map<int, std::vector<partition::HistoryRecord>> per_dst;
    for (const auto& [key, state] : blk.history.entries()) {
        if (!state.touched) continue;
        if (key.first < 0) continue;  // wall contact, never crosses blocks
        // Authority: owner of the lower-id participant.
        const dem::Particle* plo = blk.particle(key.first);
        const dem::Particle* phi = blk.particle(key.second);
        if (plo == nullptr || phi == nullptr) continue;
        if (decomp_.block_of_position(plo->x) != blk.id) continue;
        const int other_owner = decomp_.block_of_position(phi->x);
        if (other_owner == blk.id) continue;
        per_dst[other_owner].push_back({key.first, key.second, state.delta_t, state.t_impact});
    }
    for (auto& [dst, records] : per_dst)
        bus_.post({MsgKind::kHistoryRecords, blk.id, dst, step_, s, std::move(records)});
}

void Simulation::apply_history_records(BlockState& blk, int s) {
    std::set<dem::ContactHistory::Key> seen;
    for (SyncMessage& msg : bus_.collect(blk.id, MsgKind::kHistoryRecords)) {
        for (const auto& hr : std::get<std::vector<partition::HistoryRecord>>(msg.payload)) {
            const auto key = dem::ContactHistory::make_key(hr.id_a, hr.id_b);
            if (!seen.insert(key).second)
                throw SyncError("conflicting contact histories for pair (" +
                                std::to_string(key.first) + ", " + std::to_string(key.second) +
                                ")");
            auto& state = blk.history.entries()[key];
            state.delta_t = hr.delta_t;
            state.t_impact = hr.t_impact;
            state.touched = true;
        }
    }
    blk.history.purge_untouched();
    (void)s;
}

void Simulation::sub_integrate_and_sync(int b, int s) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPd);
        blk.history.begin_cycle();
        dem::integrate_pre_force(blk.particles, params_.dem.dt_p());
    }
    ScopedTimer t(blk.timings, Category::kPdComm);
    post_particle_sync(blk, s);
}

void Simulation::sub_forces(int b, int s) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPdComm);
        apply_particle_sync(blk, s);
    }
    {
        ScopedTimer t(blk.timings, Category::kPd);
        dem_pair_forces(blk);
    }
    ScopedTimer t(blk.timings, Category::kPdComm);
    post_history_records(blk, s);
}

void Simulation::sub_external_and_reduce(int b, int s) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPdComm);
        apply_history_records(blk, s);
    }
    {
        ScopedTimer t(blk.timings, Category::kPd);
        dem::apply_external_forces(blk.particles, params_.dem);
        for (dem::Particle& p : blk.particles)
            if (!p.ghost && !p.fixed) {
                p.f_new += p.f_hydro;
                p.t_new += p.t_hydro;
            }
    }
    // Force partials of remote contributions would be posted here; with pair
    // forces computed on both owners there is nothing to send, but the
    // reduction phase itself stays (it is one of the per-sub-cycle syncs).
    ScopedTimer t(blk.timings, Category::kPdComm);
}

void Simulation::sub_post_integrate(int b, int s) {
    BlockState& blk = *blocks_[b];
    {
        ScopedTimer t(blk.timings, Category::kPdComm);
        auto msgs = bus_.collect(blk.id, MsgKind::kForcePartials);
        for (const SyncMessage& msg : msgs)
            for (const auto& rec :
                 std::get<std::vector<partition::ForcePartialRecord>>(msg.payload)) {
                dem::Particle* p = blk.particle(rec.id);
                if (p == nullptr || p->ghost)
                    throw SyncError("force partial for non-local particle id " +
                                    std::to_string(rec.id));
                p->f_new += rec.f;
                p->t_new += rec.t;
            }
    }
    ScopedTimer t(blk.timings, Category::kPd);
    dem::integrate_post_force(blk.particles, params_.dem.dt_p());
    (void)s;
}

void Simulation::subcycle(int s) {
    run_phase([&](int b) { sub_integrate_and_sync(b, s); });
    count_comm_phase();  // particle sync (positions, migration, ghosts)
    run_phase([&](int b) { sub_forces(b, s); });
    count_comm_phase();  // contact history reduction
    run_phase([&](int b) { sub_external_and_reduce(b, s); });
    count_comm_phase();  // force reduction
    run_phase([&](int b) { sub_post_integrate(b, s); });
}

void Simulation::step() {
    const long before = comm_phase_counter_;

    run_phase([&](int b) { phase_post_and_map(b); });
    count_comm_phase();  // particle velocity sync
    run_phase([&](int b) { phase_setu_inner(b); });
    run_phase([&](int b) { phase_outer_reduce(b); });
    count_comm_phase();  // hydrodynamic force reduction
    run_phase([&](int b) { phase_apply_hydro(b); });

    for (int s = 0; s < params_.dem.subcycles; ++s) subcycle(s);

    ++step_;
    comm_phases_last_step_ = comm_phase_counter_ - before;
}

void Simulation::run(long steps) {
    for (long i = 0; i < steps; ++i) step();
}

void Simulation::settle_substeps(int n) {
    for (int i = 0; i < n; ++i) subcycle(next_aux_sync_());
}

void Simulation::establish_ghosts() {
    const int s = next_aux_sync_();
    run_phase([&](int b) { post_particle_sync(*blocks_[b], s); });
    run_phase([&](int b) { apply_particle_sync(*blocks_[b], s); });
}

// ---------------------------------------------------------------------------
// Observers

std::vector<dem::Particle> Simulation::gather_particles() const {
    std::vector<dem::Particle> out;
    for (const auto& blk : blocks_)
        for (const dem::Particle& p : blk->particles)
            if (!p.ghost) out.push_back(p);
    std::sort(out.begin(), out.end(),
              [](const dem::Particle& a, const dem::Particle& b) { return a.id < b.id; });
    return out;
}

Vec3 Simulation::hydro_force_total() const {
    CompensatedVec3 f;
    for (const auto& blk : blocks_)
        for (const dem::Particle& p : blk->particles)
            if (!p.ghost) f.add(p.f_hydro);
    return f.value();
}

double Simulation::total_fluid_mass() const {
    CompensatedSum m;
    for (const auto& blk : blocks_) m.add(lbm::total_mass(blk->field));
    return m.value();
}

Vec3 Simulation::total_fluid_momentum() const {
    CompensatedVec3 mom;
    for (const auto& blk : blocks_) mom.add(lbm::total_momentum(blk->field));
    return mom.value();
}

void Simulation::macroscopic_at(const Vec3i& cell, double& rho, Vec3& u) const {
    const int b = decomp_.block_of_position({cell.x + 0.5, cell.y + 0.5, cell.z + 0.5});
    const BlockState& blk = *blocks_[b];
    lbm::cell_macroscopic(blk.field, params_.fluid.f_ext, cell.x - blk.box.lo.x,
                          cell.y - blk.box.lo.y, cell.z - blk.box.lo.z, rho, u);
}

double Simulation::pdf_at(const Vec3i& cell, int q) const {
    const int b = decomp_.block_of_position({cell.x + 0.5, cell.y + 0.5, cell.z + 0.5});
    const BlockState& blk = *blocks_[b];
    return blk.field.at_src(q, cell.x - blk.box.lo.x, cell.y - blk.box.lo.y,
                            cell.z - blk.box.lo.z);
}

double Simulation::fraction_at(const Vec3i& cell) const {
    const int b = decomp_.block_of_position({cell.x + 0.5, cell.y + 0.5, cell.z + 0.5});
    const BlockState& blk = *blocks_[b];
    if (!params_.coupling) return 0.0;
    return blk.frac.btot[blk.frac.idx(cell.x - blk.box.lo.x, cell.y - blk.box.lo.y,
                                      cell.z - blk.box.lo.z)];
}

void Simulation::reset_timers() {
    for (auto& blk : blocks_) blk->timings = perf::Timings{};
}

std::vector<perf::Timings> Simulation::timings_per_worker() const {
    std::vector<perf::Timings> per_worker(decomp_.workers);
    for (const auto& blk : blocks_) {
        const int w = decomp_.blocks[blk->id].worker;
        for (int c = 0; c < perf::kCategories; ++c)
            per_worker[w].seconds[c] += blk->timings.seconds[c];
    }
    return per_worker;
}

}  // namespace lbdem
