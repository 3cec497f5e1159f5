// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lbdem/boundary.hpp"
#include "lbdem/dem.hpp"
#include "lbdem/sim.hpp"
#include "lbdem/vec3.hpp"

namespace lbdem::io {

/// Physical inputs converted to lattice units at load time. The Galileo
/// number and density ratio are honored exactly; the particle Reynolds number
/// sets the inflow velocity of the bed scenarios. The gravitational velocity
/// scale u_g pins the free lattice scale: nu = u_g d / Ga, g = u_g^2 /
/// ((rho_p/rho_f - 1) d), u_in = Re_p nu / d.
struct PhysicalInputs {
    double galileo = 8.9;
    double re_p = 1.0;
    double density_ratio = 1.1;
    double diameter_cells = 20.0;
    double u_gravity = 0.02;  ///< characteristic lattice velocity sqrt((rho_r-1) g d)
};

struct ScenarioConfig {
    std::string scenario = "custom";  ///< fluidized_bed_dilute, fluidized_bed_dense,
                                      ///< settling_sphere, poiseuille, custom
    Vec3i domain{32, 32, 32};
    Vec3i blocks{1, 1, 1};
    int workers = 1;
    KernelMode kernels = KernelMode::openmp;
    std::uint64_t seed = 1;

    lbm::FluidParams fluid;
    lbm::BcSpec bc;
    double u_inflow = 0.0;     ///< inward normal velocity of "velocity" faces
    double rho_outflow = 1.0;  ///< density of "pressure" faces

    bool coupling = true;
    int subdivisions = 8;

    int particle_count = 0;
    double particle_radius = 10.0;
    double density_ratio = 1.1;
    dem::DemParams dem;
    int settle_subcycles = 0;

    long steps = 100;
    long output_every = 0;  ///< 0 = final state only
    std::string out_dir = "out";

    std::optional<PhysicalInputs> physical;

    /// All invariant violations at once; throws ConfigError listing them.
    void validate() const;
};

/// Parses and validates a JSON config file. Unknown keys are rejected.
/// A "preset" key loads the named preset first, then applies overrides.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a hash of the canonical serialization, for run reports.
std::uint64_t config_hash(const ScenarioConfig& cfg);

/// Applies the lattice-unit conversion of cfg.physical to the fluid and DEM
/// parameters (tau, gravity, inflow velocity); no-op when absent.
void apply_unit_conversion(ScenarioConfig& cfg);

// Desk-scale presets. The reference domain 500 x 200 x 800 shrinks by the
// integer factor `scale_div` per axis at 20 cells per particle diameter;
// particle counts scale with the volume.
ScenarioConfig preset_fluidized_bed_dilute(int scale_div = 5);
ScenarioConfig preset_fluidized_bed_dense(int scale_div = 5);
ScenarioConfig preset_settling_sphere();
ScenarioConfig preset_poiseuille();
ScenarioConfig preset_by_name(const std::string& name);

}  // namespace lbdem::io
