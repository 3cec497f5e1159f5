// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "lbdem/field.hpp"
#include "lbdem/lbm.hpp"
#include "lbdem/vec3.hpp"

namespace lbdem::psm {

/// Immutable per-particle data handed to the coupling kernels once per step
/// (position, radius, cached mapping offset, velocities). This is the modeled
/// host-to-device hand-off: kernels only ever see these snapshots, never the
/// live particle storage.
struct ParticleSnapshot {
    int id = -1;
    Vec3 x{};
    double r = 0.0;
    double f_r = 0.0;
    Vec3 u{};
    Vec3 omega{};
};

/// Volume under the sphere of radius r centered above a unit square column,
/// the closed form with four arctangent terms. Valid for r >= sqrt(1/2).
double sphere_over_unit_square_volume(double r);

/// Mapping offset f(r) = V_a(r) - r + 1/2; constant per particle.
/// Throws ConfigError below the validity floor.
double f_of_r(double r);

/// Linear overlap approximation: eps = clamp(-D + f(r), 0, 1) with
/// D = |cell_center - x_p| - r the signed surface distance.
double overlap_fraction(const Vec3& cell_center, const Vec3& x_p, double r, double f_r);

/// Per-block spatial index of the particles overlapping each of k^3 sub-blocks,
/// so the mapping kernel only tests the few nearby particles per cell.
class SubBlockRegistry {
public:
    static constexpr int kDefaultSubdivisions = 8;

    /// `snapshots` must be sorted by particle id; the per-sub-block lists then
    /// stay id-ordered and the fraction field is insertion-order independent.
    void build(const CellBox& block_box, const std::vector<ParticleSnapshot>& snapshots,
               int subdivisions = kDefaultSubdivisions);

    const std::vector<int>& particles_for_cell(int i, int j, int k) const {
        const int si = i / ext_.x, sj = j / ext_.y, sk = k / ext_.z;
        return lists_[(static_cast<std::size_t>(sk) * k_ + sj) * k_ + si];
    }

    int subdivisions() const { return k_; }
    std::size_t total_registrations() const;

private:
    int k_ = 0;
    Vec3i ext_{1, 1, 1};  // sub-block extent in cells
    std::vector<std::vector<int>> lists_;
};

/// Rebuilds the per-cell (particle id, B_i) entries and the clamped total B
/// for every interior cell of the block. More than two overlapping particles
/// in one cell is an unphysical state for this method and throws NumericError.
void build_fraction_field(FractionField& frac, const CellBox& block_box,
                          const SubBlockRegistry& registry,
                          const std::vector<ParticleSnapshot>& snapshots, bool parallel);

/// Fills the per-entry solid velocity U_p + Omega x (x_cell - x_p).
/// Throws SyncError if an entry references an unknown particle id.
void set_solid_velocities(SolidVelocityField& vel, const FractionField& frac,
                          const CellBox& block_box,
                          const std::vector<ParticleSnapshot>& snapshots, bool parallel);

/// Fused PSM collide + pull-stream over one cell range. Cells with B = 0 take
/// exactly the plain SRT path; covered cells blend the solid collision
/// operator per entry and record the per-entry momentum transfer in `scratch`
/// for the later force reduction.
void psm_collide_stream_serial(PdfField& field, const lbm::FluidParams& params,
                               const FractionField& frac, const SolidVelocityField& vel,
                               CellMomentumScratch& scratch, const CellBox& range);
void psm_collide_stream_omp(PdfField& field, const lbm::FluidParams& params,
                            const FractionField& frac, const SolidVelocityField& vel,
                            CellMomentumScratch& scratch, const CellBox& range);

/// Per-particle force/torque partial with its compensation terms, so partials
/// reduced across blocks in a fixed order reproduce the single-block sums.
struct HydroPartial {
    int id = -1;
    Vec3 f, f_comp;
    Vec3 t, t_comp;
};

/// Reduces the per-cell momentum scratch into per-particle force and torque
/// partials, traversing cells in lexicographic order. Also clears the scratch.
std::vector<HydroPartial> finalize_hydro_forces(const FractionField& frac,
                                                CellMomentumScratch& scratch,
                                                const CellBox& block_box,
                                                const std::vector<ParticleSnapshot>& snapshots);

}  // namespace lbdem::psm
