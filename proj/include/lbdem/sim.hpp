// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "lbdem/boundary.hpp"
#include "lbdem/dem.hpp"
#include "lbdem/partition.hpp"
#include "lbdem/perf.hpp"
#include "lbdem/psm.hpp"

namespace lbdem {

enum class KernelMode { serial, openmp };

struct SimParams {
    lbm::FluidParams fluid;
    lbm::BcSpec bc;
    dem::DemParams dem;
    KernelMode kernels = KernelMode::openmp;
    bool coupling = true;  ///< PSM kernels; false runs the plain LBM path
    int subdivisions = psm::SubBlockRegistry::kDefaultSubdivisions;
};

/// Everything one worker owns for one block. PDF buffers, coupling fields and
/// particle storage are never shared; data crosses blocks as messages only.
struct BlockState {
    int id = -1;
    CellBox box{};
    std::array<bool, 6> domain_faces{};

    PdfField field;
    FractionField frac;
    SolidVelocityField svel;
    CellMomentumScratch scratch;

    std::vector<dem::Particle> particles;  ///< locals + ghosts, ascending id
    dem::ContactHistory history;
    std::vector<psm::ParticleSnapshot> snapshots;
    psm::SubBlockRegistry registry;
    std::vector<psm::HydroPartial> own_partials;

    perf::Timings timings;
    bool halo_pending = false;

    BlockState(int id_, const CellBox& box_, bool coupling);

    Vec3i dims() const { return box.hi - box.lo; }
    int find_particle(int id) const;  ///< index or -1
    dem::Particle* particle(int id);
};

/// Block-parallel coupled fluid-particle simulation. One worker per block
/// (blocks multiplexed when there are fewer workers), bulk-synchronous phases
/// with message delivery at every phase boundary, per the step layout:
/// halo post -> mapping -> velocity sync -> setU -> inner kernel -> halo wait
/// -> boundary handling -> outer kernel -> force reduction -> j sub-cycles.
class Simulation {
public:
    Simulation(partition::BlockDecomposition decomp, const SimParams& params,
               std::unique_ptr<partition::Scheduler> scheduler);

    void initialize_fluid(double rho, const Vec3& u);
    void set_walls(std::vector<dem::WallPlane> walls);
    /// Routes particles to their owner blocks and establishes the ghost sets.
    void add_particles(const std::vector<dem::Particle>& particles);

    void step();
    void run(long steps);
    /// Pure-DEM sub-cycles (no fluid forces); used to relax initial packings.
    void settle_substeps(int n);

    // Halo exchange with communication hiding; begin posts the non-blocking
    // sends, complete must be called before the outer kernel reads ghosts.
    void begin_halo_exchange(int b);
    void complete_halo_exchange(int b);

    const partition::BlockDecomposition& decomposition() const { return decomp_; }
    const SimParams& params() const { return params_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    BlockState& block(int b) { return *blocks_[b]; }
    const BlockState& block(int b) const { return *blocks_[b]; }
    long step_index() const { return step_; }

    double ghost_margin() const;
    double max_radius() const { return r_max_; }
    const std::vector<dem::WallPlane>& walls() const { return walls_; }

    /// Particle communication phases executed by the last step() call.
    long comm_phases_last_step() const { return comm_phases_last_step_; }
    const partition::MessageBus& bus() const { return bus_; }

    /// All local particles across blocks, ascending id.
    std::vector<dem::Particle> gather_particles() const;
    /// Sum of the coupling forces applied to the particles this step.
    Vec3 hydro_force_total() const;

    double total_fluid_mass() const;
    Vec3 total_fluid_momentum() const;
    /// Macroscopic state of a global cell (whichever block owns it).
    void macroscopic_at(const Vec3i& cell, double& rho, Vec3& u) const;
    double pdf_at(const Vec3i& cell, int q) const;
    double fraction_at(const Vec3i& cell) const;

    void reset_timers();
    std::vector<perf::Timings> timings_per_worker() const;

private:
    void run_phase(const std::function<void(int)>& fn) { scheduler_->run_phase(num_blocks(), fn); }
    void count_comm_phase() { ++comm_phase_counter_; }

    // step phases
    void phase_post_and_map(int b);
    void phase_setu_inner(int b);
    void phase_outer_reduce(int b);
    void phase_apply_hydro(int b);
    void subcycle(int s);
    void sub_integrate_and_sync(int b, int s);
    void sub_forces(int b, int s);
    void sub_external_and_reduce(int b, int s);
    void sub_post_integrate(int b, int s);

    // helpers
    void post_velocity_sync(BlockState& blk);
    void apply_velocity_sync(BlockState& blk);
    void post_particle_sync(BlockState& blk, int s);
    void apply_particle_sync(BlockState& blk, int s);
    void post_history_records(BlockState& blk, int s);
    void apply_history_records(BlockState& blk, int s);
    void build_snapshots(BlockState& blk);
    void run_kernel(BlockState& blk, const CellBox& range);
    void dem_pair_forces(BlockState& blk);
    bool ghost_eligible(const dem::Particle& p, int block) const;
    std::vector<int> neighbor_blocks(const BlockState& blk) const;
    void establish_ghosts();

    int next_aux_sync_() { return aux_sync_seq_--; }

    partition::BlockDecomposition decomp_;
    SimParams params_;
    partition::MessageBus bus_;
    std::unique_ptr<partition::Scheduler> scheduler_;
    std::vector<std::unique_ptr<BlockState>> blocks_;
    std::vector<dem::WallPlane> walls_;
    double r_max_ = 0.0;
    long step_ = 0;
    long comm_phase_counter_ = 0;
    long comm_phases_last_step_ = 0;
    int aux_sync_seq_ = -2;
    bool any_particles_ = false;
};

}  // namespace lbdem
