// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "lbdem/config.hpp"
#include "lbdem/sim.hpp"

namespace lbdem::io {

/// Builds the initialized simulation state for a validated config: block
/// decomposition, fluid at equilibrium rest, particles placed by the scenario
/// generator, bounding walls, and (for the beds) a short pure-DEM settle-in.
/// Throws ConfigError if the generator cannot place the particles.
std::unique_ptr<Simulation> build_scenario(const ScenarioConfig& cfg);

/// The particle set the generator produces for this config (exposed for the
/// decomposition-invariance tests; identical for any block grid).
std::vector<dem::Particle> generate_particles(const ScenarioConfig& cfg);

/// Bounding planes for every non-periodic domain face.
std::vector<dem::WallPlane> domain_walls(const ScenarioConfig& cfg);

}  // namespace lbdem::io
