// SPDX-License-Identifier: Apache-2.0
//
// Independent oracles for the test suites. Everything here is derived
// directly from the defining formulas (quadrature, enumeration, closed-form
// mechanics), sharing no code with the implementation paths it checks.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "lbdem/lattice.hpp"
#include "lbdem/vec3.hpp"

namespace oracles {

// Weight of a D3Q19 direction from |c|^2 alone: 0 -> 1/3, 1 -> 1/18, 2 -> 1/36.
inline double weight_of(const lbdem::Vec3i& c) {
    const int n2 = c.x * c.x + c.y * c.y + c.z * c.z;
    return n2 == 0 ? 1.0 / 3.0 : (n2 == 1 ? 1.0 / 18.0 : 1.0 / 36.0);
}

/// Term-by-term incompressible equilibrium, straight from the formula.
inline std::array<double, 19> equilibrium(double rho, const lbdem::Vec3& u) {
    std::array<double, 19> out{};
    const double cs2 = 1.0 / 3.0;
    for (int q = 0; q < 19; ++q) {
        const lbdem::Vec3i ci = lbdem::lbm::kC[q];
        const lbdem::Vec3 c{static_cast<double>(ci.x), static_cast<double>(ci.y),
                            static_cast<double>(ci.z)};
        const double cu = dot(c, u);
        out[q] = weight_of(ci) *
                 (rho + (cu / cs2 + cu * cu / (2.0 * cs2 * cs2) - dot(u, u) / (2.0 * cs2)));
    }
    return out;
}

/// Forcing operator evaluated term by term.
inline std::array<double, 19> forcing(const lbdem::Vec3& u, const lbdem::Vec3& f_ext) {
    std::array<double, 19> out{};
    const double cs2 = 1.0 / 3.0;
    for (int q = 0; q < 19; ++q) {
        const lbdem::Vec3i ci = lbdem::lbm::kC[q];
        const lbdem::Vec3 c{static_cast<double>(ci.x), static_cast<double>(ci.y),
                            static_cast<double>(ci.z)};
        const double cu = dot(c, u);
        const lbdem::Vec3 bracket = (c - u) / cs2 + (cu / (cs2 * cs2)) * c;
        out[q] = weight_of(ci) * dot(bracket, f_ext);
    }
    return out;
}

/// Brute-force moments.
inline void moments(const std::array<double, 19>& f, double& rho, lbdem::Vec3& mom) {
    rho = 0.0;
    mom = {};
    for (int q = 0; q < 19; ++q) {
        rho += f[q];
        const lbdem::Vec3i c = lbdem::lbm::kC[q];
        mom += f[q] * lbdem::Vec3{static_cast<double>(c.x), static_cast<double>(c.y),
                                  static_cast<double>(c.z)};
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature on [-1/2, 1/2]^2 for the sphere-over-square
// volume, with node-count refinement as the convergence control.

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev estimate.
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
            }
            const double dp = n * (t * p0 - p1) / (t * t - 1.0);
            const double step = p0 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        double p0 = 1.0, p1 = 0.0;
        for (int k = 0; k < n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
        }
        const double dp = n * (t * p0 - p1) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

inline double sphere_square_integral(double r, int n) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double xi = 0.5 * x[i];  // map [-1,1] -> [-1/2,1/2]
            const double yj = 0.5 * x[j];
            sum += 0.25 * w[i] * w[j] * std::sqrt(r * r - xi * xi - yj * yj);
        }
    return sum;
}

/// Adaptive: refines the node count until two levels agree.
inline double sphere_square_volume(double r, double tol = 1e-12) {
    double prev = sphere_square_integral(r, 16);
    for (int n = 32; n <= 256; n *= 2) {
        const double cur = sphere_square_integral(r, n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    return prev;
}

/// Volume fraction of the unit cell centered at `center` covered by the
/// sphere, by counting n^3 sub-cell midpoints.
inline double supersampled_fraction(const lbdem::Vec3& center, const lbdem::Vec3& x_p,
                                    double r, int n = 128) {
    const double h = 1.0 / n;
    long inside = 0;
    const double r2 = r * r;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double dx = center.x - 0.5 + (i + 0.5) * h - x_p.x;
                const double dy = center.y - 0.5 + (j + 0.5) * h - x_p.y;
                const double dz = center.z - 0.5 + (k + 0.5) * h - x_p.z;
                if (dx * dx + dy * dy + dz * dz <= r2) ++inside;
            }
    return static_cast<double>(inside) / (static_cast<double>(n) * n * n);
}

/// All index pairs within the cutoff, by O(n^2) enumeration.
inline std::vector<std::pair<int, int>> brute_force_pairs(
    const std::vector<lbdem::Vec3>& xs, const std::function<double(int, int)>& cutoff) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < static_cast<int>(xs.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(xs.size()); ++j)
            if (norm(xs[j] - xs[i]) <= cutoff(i, j)) out.emplace_back(i, j);
    return out;
}

/// Restitution coefficient of the linear spring-dashpot half-period solution.
inline double spring_dashpot_restitution(double k, double d, double m) {
    const double gamma = d / (2.0 * m);
    const double w0 = std::sqrt(k / m);
    const double wd = std::sqrt(w0 * w0 - gamma * gamma);
    return std::exp(-gamma * M_PI / wd);
}

}  // namespace oracles
