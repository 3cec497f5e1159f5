// SPDX-License-Identifier: Apache-2.0
#include "lbdem/psm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lbdem/errors.hpp"

namespace lbdem::psm {

double sphere_over_unit_square_volume(double r) {
    const double r2 = r * r;
    const double s = std::sqrt(r2 - 0.5);
    return (1.0 / 12.0 - r2) * std::atan(0.5 * s / (0.5 - r2)) + s / 3.0 +
           (r2 - 1.0 / 12.0) * std::atan(0.5 / s) -
           (4.0 / 3.0) * r2 * r * std::atan(0.25 / (r * s));
}

double f_of_r(double r) {
    const double floor_r = std::sqrt(0.5);
    if (!(r >= floor_r))
        throw ConfigError("particle radius " + std::to_string(r) +
                          " below mapping validity floor sqrt(1/2)");
    return sphere_over_unit_square_volume(r) - r + 0.5;
}

double overlap_fraction(const Vec3& cell_center, const Vec3& x_p, double r, double f_r) {
    const double dist = norm(cell_center - x_p);
    const double eps = -(dist - r) + f_r;
    return std::clamp(eps, 0.0, 1.0);
}

namespace {

inline double dist2_point_box(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double v = p[a] < lo[a] ? lo[a] - p[a] : (p[a] > hi[a] ? p[a] - hi[a] : 0.0);
        d2 += v * v;
    }
    return d2;
}

/// Snapshots are id-sorted; resolves an id back to its index.
inline int snapshot_index(const std::vector<ParticleSnapshot>& snaps, int id) {
    auto it = std::lower_bound(snaps.begin(), snaps.end(), id,
                               [](const ParticleSnapshot& s, int v) { return s.id < v; });
    if (it == snaps.end() || it->id != id) return -1;
    return static_cast<int>(it - snaps.begin());
}

}  // namespace

void SubBlockRegistry::build(const CellBox& block_box,
                             const std::vector<ParticleSnapshot>& snapshots,
                             int subdivisions) {
    k_ = subdivisions;
    const Vec3i dims = block_box.hi - block_box.lo;
    for (int a = 0; a < 3; ++a) ext_[a] = std::max(1, (dims[a] + k_ - 1) / k_);

    lists_.assign(static_cast<std::size_t>(k_) * k_ * k_, {});
    for (auto& l : lists_) l.clear();

    for (std::size_t n = 0; n < snapshots.size(); ++n) {
        const ParticleSnapshot& p = snapshots[n];
        // A particle can produce nonzero fractions for cell centers up to
        // r + f(r) < r + 1/2 away, hence the half-cell margin.
        const double reach = p.r + 0.5;
        for (int sk = 0; sk < k_; ++sk)
            for (int sj = 0; sj < k_; ++sj)
                for (int si = 0; si < k_; ++si) {
                    Vec3 lo{static_cast<double>(block_box.lo.x + si * ext_.x),
                            static_cast<double>(block_box.lo.y + sj * ext_.y),
                            static_cast<double>(block_box.lo.z + sk * ext_.z)};
                    Vec3 hi{std::min<double>(lo.x + ext_.x, block_box.hi.x),
                            std::min<double>(lo.y + ext_.y, block_box.hi.y),
                            std::min<double>(lo.z + ext_.z, block_box.hi.z)};
                    if (hi.x <= lo.x || hi.y <= lo.y || hi.z <= lo.z) continue;
                    if (dist2_point_box(p.x, lo, hi) <= reach * reach)
                        lists_[(static_cast<std::size_t>(sk) * k_ + sj) * k_ + si].push_back(
                            static_cast<int>(n));
                }
    }
}

std::size_t SubBlockRegistry::total_registrations() const {
    std::size_t n = 0;
    for (const auto& l : lists_) n += l.size();
    return n;
}

void build_fraction_field(FractionField& frac, const CellBox& block_box,
                          const SubBlockRegistry& registry,
                          const std::vector<ParticleSnapshot>& snapshots, bool parallel) {
    const Vec3i dims = block_box.hi - block_box.lo;
    if (frac.nx != dims.x || frac.ny != dims.y || frac.nz != dims.z)
        frac.resize(dims.x, dims.y, dims.z);

    long overfull = 0;

#pragma omp parallel for collapse(2) schedule(static) reduction(+ : overfull) if (parallel)
    for (int k = 0; k < dims.z; ++k)
        for (int j = 0; j < dims.y; ++j)
            for (int i = 0; i < dims.x; ++i) {
                const long c = frac.idx(i, j, k);
                const Vec3 center{block_box.lo.x + i + 0.5, block_box.lo.y + j + 0.5,
                                  block_box.lo.z + k + 0.5};
                int cnt = 0;
                double sum = 0.0;
                for (int n : registry.particles_for_cell(i, j, k)) {
                    const ParticleSnapshot& p = snapshots[n];
                    const double eps = overlap_fraction(center, p.x, p.r, p.f_r);
                    if (eps <= 0.0) continue;
                    if (cnt == 0) {
                        frac.id0[c] = p.id;
                        frac.b0[c] = eps;
                    } else if (cnt == 1) {
                        frac.id1[c] = p.id;
                        frac.b1[c] = eps;
                    } else {
                        ++overfull;
                        break;
                    }
                    ++cnt;
                    sum += eps;
                }
                frac.count[c] = static_cast<std::uint8_t>(cnt);
                frac.btot[c] = std::min(1.0, sum);
            }

    if (overfull > 0)
        throw NumericError("more than two particles overlap a single cell in " +
                           std::to_string(overfull) +
                           " cells; particle penetration too deep for the coupling");
}

void set_solid_velocities(SolidVelocityField& vel, const FractionField& frac,
                          const CellBox& block_box,
                          const std::vector<ParticleSnapshot>& snapshots, bool parallel) {
    const long cells = frac.cells();
    if (static_cast<long>(vel.v0.size()) != cells) vel.resize(cells);
    long unknown = 0;

#pragma omp parallel for collapse(2) schedule(static) reduction(+ : unknown) if (parallel)
    for (int k = 0; k < frac.nz; ++k)
        for (int j = 0; j < frac.ny; ++j)
            for (int i = 0; i < frac.nx; ++i) {
                const long c = frac.idx(i, j, k);
                const int cnt = frac.count[c];
                if (cnt == 0) continue;
                const Vec3 center{block_box.lo.x + i + 0.5, block_box.lo.y + j + 0.5,
                                  block_box.lo.z + k + 0.5};
                for (int e = 0; e < cnt; ++e) {
                    const int id = e == 0 ? frac.id0[c] : frac.id1[c];
                    const int n = snapshot_index(snapshots, id);
                    if (n < 0) {
                        ++unknown;
                        continue;
                    }
                    const ParticleSnapshot& p = snapshots[n];
                    const Vec3 v = p.u + cross(p.omega, center - p.x);
                    (e == 0 ? vel.v0[c] : vel.v1[c]) = v;
                }
            }
    if (unknown > 0)
        throw SyncError("solid velocity field references " + std::to_string(unknown) +
                        " unknown particle ids (ghost synchronization failed)");
}

namespace {

/// One covered cell of the fused kernel. Returns false on instability.
inline bool psm_cell(lbm::Populations& f, const Vec3& f_ext, double inv_tau, int cnt,
                     double b_tot, const double* b_entry, const Vec3* u_entry,
                     Vec3* momentum_out) {
    using namespace lbm;
    double rho = 0.0;
    Vec3 mom{};
    for (int q = 0; q < kQ; ++q) {
        rho += f[q];
        mom += f[q] * cvec(q);
    }
    const Vec3 u = mom / kRho0;
    const double u_sq = dot(u, u);
    const bool ok = rho > 0.0 && u_sq <= kMaxVelocity * kMaxVelocity && std::isfinite(rho);

    Populations feq_f;
    equilibrium(rho, u, feq_f);

    Populations fout;
    const double fluid_w = 1.0 - b_tot;
    for (int q = 0; q < kQ; ++q) {
        const Vec3 c = cvec(q);
        const double cu = dot(c, u);
        const Vec3 bracket = (c - u) * kInvCs2 + (cu * kInvCs4) * c;
        const double fq_force = kDt * kW[q] * dot(bracket, f_ext);
        fout[q] = f[q] + fluid_w * (inv_tau * (feq_f[q] - f[q]) + fq_force);
    }

    for (int e = 0; e < cnt; ++e) {
        Populations feq_p;
        equilibrium(rho, u_entry[e], feq_p);
        Vec3 m{};
        for (int q = 0; q < kQ; ++q) {
            const int qb = opposite(q);
            const double c_solid = (f[qb] - feq_f[qb]) - (f[q] - feq_p[q]);
            fout[q] += b_entry[e] * c_solid;
            m -= c_solid * cvec(q);  // sum over c_qbar
        }
        momentum_out[e] = b_entry[e] * m;
    }

    f = fout;
    return ok;
}

template <bool kParallel>
void psm_collide_stream_impl(PdfField& field, const lbm::FluidParams& params,
                             const FractionField& frac, const SolidVelocityField& vel,
                             CellMomentumScratch& scratch, const CellBox& range) {
    using namespace lbm;
    const double* __restrict srcp[kQ];
    double* __restrict dstp[kQ];
    long shifts[kQ];
    for (int q = 0; q < kQ; ++q) {
        srcp[q] = field.src(q);
        dstp[q] = field.dst(q);
        shifts[q] = field.shift(q);
    }
    const double inv_tau = kDt / params.tau;
    const Vec3 f_ext = params.f_ext;
    long bad = 0;

#pragma omp parallel for collapse(2) schedule(static) reduction(+ : bad) if (kParallel)
    for (int k = range.lo.z; k < range.hi.z; ++k)
        for (int j = range.lo.y; j < range.hi.y; ++j) {
            long base = field.idx(range.lo.x, j, k);
            long fc = frac.idx(range.lo.x, j, k);
            for (int i = range.lo.x; i < range.hi.x; ++i, ++base, ++fc) {
                Populations f;
                for (int q = 0; q < kQ; ++q) f[q] = srcp[q][base - shifts[q]];

                const int cnt = frac.count[fc];
                if (cnt == 0) {
                    if (!collide_cell(f, f_ext, inv_tau)) ++bad;
                } else {
                    const double b_entry[2] = {frac.b0[fc], frac.b1[fc]};
                    const Vec3 u_entry[2] = {vel.v0[fc], vel.v1[fc]};
                    Vec3 m[2];
                    if (!psm_cell(f, f_ext, inv_tau, cnt, frac.btot[fc], b_entry, u_entry, m))
                        ++bad;
                    scratch.m0[fc] = m[0];
                    if (cnt > 1) scratch.m1[fc] = m[1];
                }
                for (int q = 0; q < kQ; ++q) dstp[q][base] = f[q];
            }
        }
    if (bad > 0)
        throw NumericError("fluid instability in PSM kernel: " + std::to_string(bad) +
                           " cells out of range");
}

}  // namespace

void psm_collide_stream_serial(PdfField& field, const lbm::FluidParams& params,
                               const FractionField& frac, const SolidVelocityField& vel,
                               CellMomentumScratch& scratch, const CellBox& range) {
    psm_collide_stream_impl<false>(field, params, frac, vel, scratch, range);
}

void psm_collide_stream_omp(PdfField& field, const lbm::FluidParams& params,
                            const FractionField& frac, const SolidVelocityField& vel,
                            CellMomentumScratch& scratch, const CellBox& range) {
    psm_collide_stream_impl<true>(field, params, frac, vel, scratch, range);
}

std::vector<HydroPartial> finalize_hydro_forces(const FractionField& frac,
                                                CellMomentumScratch& scratch,
                                                const CellBox& block_box,
                                                const std::vector<ParticleSnapshot>& snapshots) {
    struct Acc {
        CompensatedVec3 f, t;
        bool used = false;
    };
    std::vector<Acc> acc(snapshots.size());

    for (int k = 0; k < frac.nz; ++k)
        for (int j = 0; j < frac.ny; ++j)
            for (int i = 0; i < frac.nx; ++i) {
                const long c = frac.idx(i, j, k);
                const int cnt = frac.count[c];
                if (cnt == 0) continue;
                const Vec3 center{block_box.lo.x + i + 0.5, block_box.lo.y + j + 0.5,
                                  block_box.lo.z + k + 0.5};
                for (int e = 0; e < cnt; ++e) {
                    const int id = e == 0 ? frac.id0[c] : frac.id1[c];
                    const int n = snapshot_index(snapshots, id);
                    if (n < 0)
                        throw SyncError("hydrodynamic force for unknown particle id " +
                                        std::to_string(id));
                    const Vec3 m = e == 0 ? scratch.m0[c] : scratch.m1[c];
                    acc[n].f.add(m);
                    acc[n].t.add(cross(center - snapshots[n].x, m));
                    acc[n].used = true;
                    (e == 0 ? scratch.m0[c] : scratch.m1[c]) = Vec3{};
                }
            }

    std::vector<HydroPartial> out;
    for (std::size_t n = 0; n < snapshots.size(); ++n) {
        if (!acc[n].used) continue;
        HydroPartial p;
        p.id = snapshots[n].id;
        p.f = {acc[n].f.x.sum, acc[n].f.y.sum, acc[n].f.z.sum};
        p.f_comp = {acc[n].f.x.comp, acc[n].f.y.comp, acc[n].f.z.comp};
        p.t = {acc[n].t.x.sum, acc[n].t.y.sum, acc[n].t.z.sum};
        p.t_comp = {acc[n].t.x.comp, acc[n].t.y.comp, acc[n].t.z.comp};
        out.push_back(p);
    }
    return out;
}

}  // namespace lbdem::psm
