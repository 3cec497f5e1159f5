// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <string>

#include "lbdem/errors.hpp"
#include "lbdem/field.hpp"
#include "lbdem/lattice.hpp"

namespace lbdem::lbm {

/// Lattice units throughout: dx = dt = 1, rho0 = 1.
inline constexpr double kRho0 = 1.0;
inline constexpr double kDt = 1.0;

/// Velocity magnitude beyond which the run is aborted (close to c_s).
inline constexpr double kMaxVelocity = 0.57;

struct FluidParams {
    double tau = 1.0;       ///< relaxation time, must exceed 1/2
    Vec3 f_ext{};           ///< constant body-force density

    double nu() const { return (tau - 0.5) * kCs2; }
    double omega() const { return 1.0 / tau; }

    void validate() const {
        if (!(tau > 0.5))
            throw ConfigError("fluid relaxation time tau must be > 0.5 (got " +
                              std::to_string(tau) + ")");
    }
};

using Populations = std::array<double, kQ>;

/// Incompressible equilibrium populations for density rho and velocity u.
inline void equilibrium(double rho, const Vec3& u, Populations& feq) {
    const double u_sq = dot(u, u);
    for (int q = 0; q < kQ; ++q) {
        const double cu = dot(cvec(q), u);
        feq[q] = kW[q] * (rho + kRho0 * (cu * kInvCs2 + 0.5 * cu * cu * kInvCs4 -
                                         0.5 * u_sq * kInvCs2));
    }
}

inline Populations equilibrium(double rho, const Vec3& u) {
    Populations feq;
    equilibrium(rho, u, feq);
    return feq;
}

/// Moments of the populations. The returned velocity carries the half-step
/// body-force shift and is the observable fluid velocity.
inline void macroscopic(const Populations& f, const Vec3& f_ext, double& rho, Vec3& u) {
    rho = 0.0;
    Vec3 mom{};
    for (int q = 0; q < kQ; ++q) {
        rho += f[q];
        mom += f[q] * cvec(q);
    }
    u = mom / kRho0 + (kDt / (2.0 * kRho0)) * f_ext;
}

/// SRT (BGK) collision term, (dt/tau)(f_eq - f).
inline Populations srt_collision_term(const Populations& f, double rho, const Vec3& u,
                                      double tau) {
    Populations feq, out;
    equilibrium(rho, u, feq);
    const double omega = kDt / tau;
    for (int q = 0; q < kQ; ++q) out[q] = omega * (feq[q] - f[q]);
    return out;
}

/// Body-force operator. Zeroth moment vanishes, first moment is dt * f_ext.
inline Populations forcing_term(const Vec3& u, const Vec3& f_ext) {
    Populations out;
    for (int q = 0; q < kQ; ++q) {
        const Vec3 c = cvec(q);
        const double cu = dot(c, u);
        const Vec3 bracket = (c - u) * kInvCs2 + (cu * kInvCs4) * c;
        out[q] = kDt * kW[q] * dot(bracket, f_ext);
    }
    return out;
}

/// One fluid cell of the fused update: gathered populations in, post-collision
/// populations out. The equilibrium velocity is the bare first moment; the
/// half-force shift belongs to the observable velocity only, which keeps the
/// per-step momentum input at exactly dt * f_ext.
///
/// Returns false if the cell left the stable region (rho <= 0 or |u| too big).
inline bool collide_cell(Populations& f, const Vec3& f_ext, double inv_tau) {
    double rho = 0.0, ux = 0.0, uy = 0.0, uz = 0.0;
    for (int q = 0; q < kQ; ++q) {
        rho += f[q];
        ux += f[q] * kC[q].x;
        uy += f[q] * kC[q].y;
        uz += f[q] * kC[q].z;
    }
    ux /= kRho0;
    uy /= kRho0;
    uz /= kRho0;
    const double u_sq = ux * ux + uy * uy + uz * uz;

    const bool ok = rho > 0.0 && u_sq <= kMaxVelocity * kMaxVelocity && std::isfinite(rho);
    const bool forced = f_ext.x != 0.0 || f_ext.y != 0.0 || f_ext.z != 0.0;

    for (int q = 0; q < kQ; ++q) {
        const double cx = kC[q].x, cy = kC[q].y, cz = kC[q].z;
        const double cu = cx * ux + cy * uy + cz * uz;
        const double feq = kW[q] * (rho + kRho0 * (cu * kInvCs2 + 0.5 * cu * cu * kInvCs4 -
                                                   0.5 * u_sq * kInvCs2));
        double out = f[q] + inv_tau * (feq - f[q]);
        if (forced) {
            const double bx = (cx - ux) * kInvCs2 + cu * kInvCs4 * cx;
            const double by = (cy - uy) * kInvCs2 + cu * kInvCs4 * cy;
            const double bz = (cz - uz) * kInvCs2 + cu * kInvCs4 * cz;
            out += kDt * kW[q] * (bx * f_ext.x + by * f_ext.y + bz * f_ext.z);
        }
        f[q] = out;
    }
    return ok;
}

/// Pull-streams the source buffer into the destination buffer over the given
/// interior range: dst[x][q] = src[x - c_q][q]. Ghosts of src must be valid.
void stream(PdfField& field, const CellBox& range);

/// Fused pull-stream + SRT collision over a cell range, serial reference.
/// Throws NumericError if any cell trips the stability guard.
void collide_stream_serial(PdfField& field, const FluidParams& params, const CellBox& range);

/// OpenMP twin of collide_stream_serial; bitwise-identical results.
void collide_stream_omp(PdfField& field, const FluidParams& params, const CellBox& range);

/// Density and observable velocity of one interior cell of the source buffer.
void cell_macroscopic(const PdfField& field, const Vec3& f_ext, int i, int j, int k,
                      double& rho, Vec3& u);

/// Total interior mass / momentum of the source buffer (compensated sums).
double total_mass(const PdfField& field);
Vec3 total_momentum(const PdfField& field);

}  // namespace lbdem::lbm
