// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <variant>
#include <vector>

#include "lbdem/dem.hpp"
#include "lbdem/errors.hpp"
#include "lbdem/field.hpp"
#include "lbdem/psm.hpp"

namespace lbdem::partition {

enum class NeighborClass { face, edge, corner };

struct NeighborInfo {
    int block = -1;
    Vec3i offset{};  ///< direction from this block, components in {-1,0,1}

    NeighborClass classify() const {
        const int n = (offset.x != 0) + (offset.y != 0) + (offset.z != 0);
        return n == 1 ? NeighborClass::face : (n == 2 ? NeighborClass::edge : NeighborClass::corner);
    }
};

/// Axis-aligned blocks tiling the domain exactly, with the (up to 26) neighbor
/// topology and a worker assignment. Periodic axes wrap the topology; a block
/// can be its own neighbor there.
struct BlockDecomposition {
    Vec3i domain{};
    Vec3i grid{};
    std::array<bool, 3> periodic{};
    int workers = 1;

    struct BlockInfo {
        int id = -1;
        Vec3i coord{};
        CellBox box{};                         ///< global cell range
        std::vector<NeighborInfo> neighbors;   ///< keyed by offset, <= 26 entries
        std::array<bool, 6> domain_faces{};    ///< block face lies on a domain face
        int worker = 0;
    };
    std::vector<BlockInfo> blocks;

    int block_index(const Vec3i& coord) const {
        return (coord.z * grid.y + coord.y) * grid.x + coord.x;
    }
    /// Owner block of a position (clamped to the domain).
    int block_of_position(const Vec3& x) const;
    /// Distinct other blocks this block talks to.
    int partner_count(int block) const;
};

/// Splits the domain into an evenly dividing block grid.
/// Throws ConfigError on non-divisible dimensions.
BlockDecomposition decompose(const Vec3i& domain, const Vec3i& grid,
                             const std::array<bool, 3>& periodic, int workers);

// ---------------------------------------------------------------------------
// Messages. All cross-worker data flows through these; a message posted in one
// phase becomes visible to its destination in the next phase.

enum class MsgKind : int {
    kPdfHalo = 0,
    kVelocitySync,
    kParticleSync,
    kHydroPartials,
    kForcePartials,
    kHistoryRecords,
};
inline constexpr int kMsgKinds = 6;

struct PdfSlab {
    Vec3i dir{};  ///< receiver-side ghost direction this slab fills
    Vec3i extent{};
    std::vector<double> values;  ///< q-major, lexicographic cells
};

struct VelocityRecord {
    int id = -1;
    Vec3 u, w;
};

struct StateRecord {
    int id = -1;
    bool migrate = false;  ///< ownership transfer, otherwise a ghost copy
    bool fixed = false;
    double r = 1.0, m = 1.0;
    Vec3 x, u, w;
    Vec3 f_old, t_old, f_new, t_new;
    Vec3 f_hydro, t_hydro;
};

struct HistoryRecord {
    int id_a = -1, id_b = -1;
    Vec3 delta_t;
    long t_impact = 0;
};

struct ParticleSyncPayload {
    std::vector<StateRecord> states;
    std::vector<HistoryRecord> histories;  ///< travel with migrating particles
};

struct ForcePartialRecord {
    int id = -1;
    Vec3 f, t;
};

using Payload = std::variant<std::vector<PdfSlab>, std::vector<VelocityRecord>,
                             ParticleSyncPayload, std::vector<psm::HydroPartial>,
                             std::vector<ForcePartialRecord>, std::vector<HistoryRecord>>;

struct SyncMessage {
    MsgKind kind{};
    int src = -1, dst = -1;
    long step = 0;
    int subcycle = -1;
    Payload payload;
};

/// Modeled wire size of a message, for the communication-volume report.
std::size_t message_bytes(const SyncMessage& msg);

/// Per-destination mailboxes with byte accounting. Collect sorts by source so
/// reductions see a fixed order regardless of scheduling.
class MessageBus {
public:
    explicit MessageBus(int n_blocks) : boxes_(n_blocks), mutexes_(n_blocks) {}

    void post(SyncMessage&& msg);
    std::vector<SyncMessage> collect(int dst, MsgKind kind);

    /// Bytes and message count posted so far, by kind.
    std::size_t bytes_posted(MsgKind kind) const { return bytes_[static_cast<int>(kind)]; }
    std::size_t messages_posted() const { return messages_; }

private:
    std::vector<std::vector<SyncMessage>> boxes_;
    std::vector<std::mutex> mutexes_;
    std::array<std::size_t, kMsgKinds> bytes_{};
    std::size_t messages_ = 0;
    std::mutex stats_mutex_;
};

// ---------------------------------------------------------------------------
// Phase schedulers. A phase runs one function per block; all messages posted
// during a phase are delivered before the next phase starts.

class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual void run_phase(int n_blocks, const std::function<void(int)>& fn) = 0;
    virtual int workers() const = 0;
};

/// Deterministic single-threaded reference: blocks in ascending id order.
class SerialScheduler final : public Scheduler {
public:
    void run_phase(int n_blocks, const std::function<void(int)>& fn) override {
        for (int b = 0; b < n_blocks; ++b) fn(b);
    }
    int workers() const override { return 1; }
};

/// Persistent worker threads; block b runs on worker b % workers. The phase
/// barrier is the message-delivery point.
class ThreadPoolScheduler final : public Scheduler {
public:
    explicit ThreadPoolScheduler(int workers);
    ~ThreadPoolScheduler() override;

    void run_phase(int n_blocks, const std::function<void(int)>& fn) override;
    int workers() const override { return static_cast<int>(threads_.size()); }

private:
    void worker_loop(int w);

    std::vector<std::thread> threads_;
    std::mutex m_;
    std::condition_variable cv_main_, cv_work_;
    const std::function<void(int)>* fn_ = nullptr;
    int n_blocks_ = 0;
    long epoch_ = 0;
    int remaining_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

/// Per-process communication volume summary for the particle synchronization.
struct CommVolumeReport {
    std::size_t max_bytes = 0;    ///< max over processes, bytes per sync call
    double avg_bytes = 0.0;       ///< average over processes
    int max_partners = 0;
    std::string to_table() const;
};

/// Static estimate from the current ghost sets and record sizes: for each
/// block, the full-state bytes it would send plus receive in one particle
/// synchronization given the particle positions.
CommVolumeReport comm_volume_report(const BlockDecomposition& decomp,
                                    const std::vector<dem::Particle>& particles,
                                    double ghost_margin);

}  // namespace lbdem::partition
