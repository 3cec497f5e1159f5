// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "lbdem/sim.hpp"

namespace lbdem::validation {

/// Body-force-driven channel against the analytic parabola.
struct PoiseuilleResult {
    double u_measured = 0.0;
    double u_analytic = 0.0;
    double rel_err = 1.0;
    bool pass = false;
};
PoiseuilleResult poiseuille(KernelMode kernels = KernelMode::openmp);

/// Periodic force-free run; total mass must stay put.
struct MassResult {
    double drift = 0.0;
    bool pass = false;
};
MassResult mass_conservation(long steps = 1000);

/// Periodic domain, one held sphere, impulsively started uniform flow: the
/// reported coupling force must equal minus the fluid momentum change,
/// step by step.
struct MomentumResult {
    double max_residual = 0.0;
    bool pass = false;
};
MomentumResult psm_momentum_bookkeeping(long steps = 100);

/// Full-step fields of a particle-free coupled run against the plain fluid
/// path; must agree bitwise.
struct DegeneracyResult {
    long steps = 0;
    bool bitwise_equal = false;
};
DegeneracyResult psm_degeneracy(long steps = 100);

/// Single sphere settling in a closed box. The expected terminal Reynolds
/// number comes from the drag correlation with the standard container
/// correction for the finite duct width.
struct SettlingResult {
    double u_terminal = 0.0;
    double re_measured = 0.0;
    double re_predicted = 0.0;
    double drift = 1.0;       ///< relative spread over the final 20% of steps
    long steps_run = 0;
    bool steady = false;
    bool pass = false;
};
SettlingResult settling_sphere(long max_steps = 4200);

/// Terminal Reynolds number predicted by the drag correlation (with wall
/// correction factor k_wall >= 1) for gravity-driven settling.
double predicted_settling_re(double galileo, double k_wall);
/// Container correction for a sphere on the axis of a square duct of width w:
/// the geometric mean of the two bracketing resummations of the Stokes wall
/// series (only the linear square-duct coefficient is established).
double wall_correction_factor(double diameter, double duct_width);
void wall_correction_bounds(double diameter, double duct_width, double& k_lo, double& k_hi);

/// Same scenario run with two block grids; fields and particle states must
/// agree within tol after `steps`.
struct DecompositionResult {
    double max_field_diff = 0.0;
    double max_particle_diff = 0.0;
    bool pass = false;
};
DecompositionResult decomposition_invariance(long steps = 100, double tol = 1e-12);

}  // namespace lbdem::validation
