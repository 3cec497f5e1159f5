// SPDX-License-Identifier: Apache-2.0
#include "lbdem/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lbdem/scenario.hpp"

namespace lbdem::validation {

PoiseuilleResult poiseuille(KernelMode kernels) {
    io::ScenarioConfig cfg = io::preset_poiseuille();
    cfg.kernels = kernels;
    auto sim = io::build_scenario(cfg);
    sim->run(8000);

    const int h = cfg.domain.y;
    const double nu = cfg.fluid.nu();
    const double u_max = cfg.fluid.f_ext.x * h * h / (8.0 * lbm::kRho0 * nu);

    // Centerline falls between the two middle cell rows.
    double rho;
    Vec3 u_lo, u_hi;
    sim->macroscopic_at({cfg.domain.x / 2, h / 2 - 1, cfg.domain.z / 2}, rho, u_lo);
    sim->macroscopic_at({cfg.domain.x / 2, h / 2, cfg.domain.z / 2}, rho, u_hi);

    PoiseuilleResult r;
    r.u_measured = 0.5 * (u_lo.x + u_hi.x);
    r.u_analytic = u_max;
    r.rel_err = std::abs(r.u_measured - r.u_analytic) / r.u_analytic;
    r.pass = r.rel_err < 0.01;
    return r;
}

MassResult mass_conservation(long steps) {
    io::ScenarioConfig cfg;
    cfg.scenario = "custom";
    cfg.domain = {16, 16, 16};
    cfg.fluid.tau = 0.7;
    cfg.coupling = false;
    cfg.steps = steps;
    auto sim = io::build_scenario(cfg);

    // Smooth shear-wave initial state, well inside the stable range.
    for (int b = 0; b < sim->num_blocks(); ++b) {
        BlockState& blk = sim->block(b);
        const Vec3i d = blk.dims();
        for (int k = 0; k < d.z; ++k)
            for (int j = 0; j < d.y; ++j)
                for (int i = 0; i < d.x; ++i) {
                    const double gx = blk.box.lo.x + i + 0.5;
                    const double gy = blk.box.lo.y + j + 0.5;
                    const double gz = blk.box.lo.z + k + 0.5;
                    const Vec3 u{0.02 * std::sin(2.0 * dem::kPi * gy / cfg.domain.y),
                                 0.015 * std::cos(2.0 * dem::kPi * gz / cfg.domain.z),
                                 0.01 * std::sin(2.0 * dem::kPi * gx / cfg.domain.x)};
                    const auto feq = lbm::equilibrium(1.0, u);
                    const long base = blk.field.idx(i, j, k);
                    for (int q = 0; q < lbm::kQ; ++q) blk.field.src(q)[base] = feq[q];
                }
    }

    const double m0 = sim->total_fluid_mass();
    sim->run(steps);
    MassResult r;
    // Relative drift: the absolute total scales with the cell count while the
    // per-cell update is exact only to rounding.
    r.drift = std::abs(sim->total_fluid_mass() - m0) / m0;
    r.pass = r.drift < 1e-10;
    return r;
}

MomentumResult psm_momentum_bookkeeping(long steps) {
    io::ScenarioConfig cfg;
    cfg.scenario = "custom";
    cfg.domain = {48, 48, 48};
    cfg.fluid.tau = 0.65;
    cfg.coupling = true;
    cfg.dem.subcycles = 1;
    auto sim = io::build_scenario(cfg);

    dem::Particle p;
    p.id = 0;
    p.r = 10.0;
    p.m = 1.1 * p.volume();
    p.x = {24.0, 24.0, 24.0};
    p.fixed = true;
    sim->add_particles({p});

    sim->initialize_fluid(1.0, {0.01, 0.0, 0.0});

    MomentumResult r;
    for (long s = 0; s < steps; ++s) {
        const Vec3 before = sim->total_fluid_momentum();
        sim->step();
        const Vec3 after = sim->total_fluid_momentum();
        const Vec3 force = sim->hydro_force_total();
        const Vec3 residual = after - before + force;
        r.max_residual = std::max({r.max_residual, std::abs(residual.x),
                                   std::abs(residual.y), std::abs(residual.z)});
    }
    r.pass = r.max_residual < 1e-10;
    return r;
}

DegeneracyResult psm_degeneracy(long steps) {
    io::ScenarioConfig base;
    base.scenario = "custom";
    base.domain = {24, 24, 24};
    base.fluid.tau = 0.75;
    base.fluid.f_ext = {1e-6, 2e-6, 0.0};

    io::ScenarioConfig with_coupling = base;
    with_coupling.coupling = true;
    io::ScenarioConfig plain = base;
    plain.coupling = false;

    auto sim_a = io::build_scenario(with_coupling);
    auto sim_b = io::build_scenario(plain);
    sim_a->run(steps);
    sim_b->run(steps);

    DegeneracyResult r;
    r.steps = steps;
    r.bitwise_equal = true;
    for (int k = 0; k < base.domain.z && r.bitwise_equal; ++k)
        for (int j = 0; j < base.domain.y && r.bitwise_equal; ++j)
            for (int i = 0; i < base.domain.x && r.bitwise_equal; ++i)
                for (int q = 0; q < lbm::kQ; ++q)
                    if (sim_a->pdf_at({i, j, k}, q) != sim_b->pdf_at({i, j, k}, q)) {
                        r.bitwise_equal = false;
                        break;
                    }
    return r;
}

void wall_correction_bounds(double diameter, double duct_width, double& k_lo, double& k_hi) {
    // Drag increase for a sphere on the axis of a square duct. Only the
    // linear coefficient of the Stokes wall correction is established for
    // the square cross-section (1.9030, method of reflections); at the
    // diameter ratios reachable at desk scale the two standard resummations
    // of that series bracket the true factor:
    //   numerator form    K = 1 + 1.9030 lam                    (lower bound)
    //   reciprocal form   K = 1 / (1 - 2.1044 lam_eff + ...)    (upper bound)
    // where the reciprocal form reuses the cylinder (Haberman-Sayre) series
    // at the equivalent ratio lam_eff = (1.9030/2.1044) lam.
    const double lam = diameter / duct_width;
    k_lo = 1.0 + 1.9030 * lam;

    const double le = (1.9030 / 2.1044) * lam;
    const double l3 = le * le * le;
    const double l5 = l3 * le * le;
    const double l6 = l5 * le;
    const double num = 1.0 - 0.75857 * l5;
    const double den = 1.0 - 2.1044 * le + 2.0888 * l3 - 1.7068 * l5 + 0.72603 * l6;
    k_hi = num / den;
}

double wall_correction_factor(double diameter, double duct_width) {
    // Geometric mean of the bracketing forms: the unbiased estimate given
    // that the higher-order square-duct coefficients are not available. The
    // bracket half-width (about 10% at lam = 0.21) sits well inside the
    // 15% tolerance the settling check allows.
    double k_lo, k_hi;
    wall_correction_bounds(diameter, duct_width, k_lo, k_hi);
    return std::sqrt(k_lo * k_hi);
}

double predicted_settling_re(double galileo, double k_wall) {
    // Ga^2 = (3/4) C_D(Re) Re^2 with C_D = 24/Re (1 + 0.15 Re^0.687) k_wall.
    const double target = galileo * galileo / (18.0 * k_wall);
    double re = target;
    for (int it = 0; it < 200; ++it) re = target / (1.0 + 0.15 * std::pow(re, 0.687));
    return re;
}

SettlingResult settling_sphere(long max_steps) {
    io::ScenarioConfig cfg = io::preset_settling_sphere();
    auto sim = io::build_scenario(cfg);

    const double nu = cfg.fluid.nu();
    const double d = 2.0 * cfg.particle_radius;

    SettlingResult r;
    std::vector<double> uz;
    uz.reserve(max_steps);
    for (long s = 0; s < max_steps; ++s) {
        sim->step();
        uz.push_back(sim->gather_particles().front().u.z);

        if (s >= 1600 && (s + 1) % 100 == 0) {
            const long n = static_cast<long>(uz.size());
            const long w0 = n - n / 5;  // final 20%
            double lo = uz[w0], hi = uz[w0], sum = 0.0;
            for (long i = w0; i < n; ++i) {
                lo = std::min(lo, uz[i]);
                hi = std::max(hi, uz[i]);
                sum += uz[i];
            }
            const double mean = sum / (n - w0);
            r.drift = std::abs(hi - lo) / std::abs(mean);
            r.u_terminal = mean;
            r.steps_run = n;
            if (r.drift < 0.01) {
                r.steady = true;
                break;
            }
        }
    }

    r.re_measured = std::abs(r.u_terminal) * d / nu;
    r.re_predicted = predicted_settling_re(cfg.physical->galileo,
                                           wall_correction_factor(d, cfg.domain.x));
    r.pass = r.steady && std::abs(r.re_measured - r.re_predicted) / r.re_predicted < 0.15;
    return r;
}

DecompositionResult decomposition_invariance(long steps, double tol) {
    io::ScenarioConfig cfg_a = io::preset_fluidized_bed_dilute(5);
    cfg_a.steps = steps;
    io::ScenarioConfig cfg_b = cfg_a;
    cfg_b.blocks = {2, 2, 2};

    auto sim_a = io::build_scenario(cfg_a);
    auto sim_b = io::build_scenario(cfg_b);
    sim_a->run(steps);
    sim_b->run(steps);

    DecompositionResult r;
    for (int k = 0; k < cfg_a.domain.z; ++k)
        for (int j = 0; j < cfg_a.domain.y; ++j)
            for (int i = 0; i < cfg_a.domain.x; ++i)
                for (int q = 0; q < lbm::kQ; ++q)
                    r.max_field_diff =
                        std::max(r.max_field_diff, std::abs(sim_a->pdf_at({i, j, k}, q) -
                                                            sim_b->pdf_at({i, j, k}, q)));

    const auto pa = sim_a->gather_particles();
    const auto pb = sim_b->gather_particles();
    if (pa.size() != pb.size()) {
        r.max_particle_diff = std::numeric_limits<double>::infinity();
    } else {
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                r.max_particle_diff =
                    std::max(r.max_particle_diff, std::abs(pa[i].x[a] - pb[i].x[a]));
                r.max_particle_diff =
                    std::max(r.max_particle_diff, std::abs(pa[i].u[a] - pb[i].u[a]));
                r.max_particle_diff =
                    std::max(r.max_particle_diff, std::abs(pa[i].w[a] - pb[i].w[a]));
            }
        }
    }
    r.pass = r.max_field_diff <= tol && r.max_particle_diff <= tol;
    return r;
}

}  // namespace lbdem::validation
