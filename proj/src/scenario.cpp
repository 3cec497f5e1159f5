// SPDX-License-Identifier: Apache-2.0
#include "lbdem/scenario.hpp"

#include <cmath>
#include <random>

namespace lbdem::io {

namespace {

/// Portable uniform in [0,1); uniform_real_distribution is not bit-stable
/// across standard libraries.
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

/// Jittered cubic lattice filling the lower part of the box, bottom-up.
std::vector<dem::Particle> jittered_bed(const ScenarioConfig& cfg) {
    const double r = cfg.particle_radius;
    const double spacing = 2.0 * r * 1.06;
    const double jitter = 0.4 * (spacing - 2.0 * r);
    const double wall_gap = r * 1.02;

    std::mt19937_64 rng(cfg.seed);
    std::vector<dem::Particle> out;

    const int nx = std::max(1, static_cast<int>((cfg.domain.x - 2.0 * wall_gap) / spacing));
    const int ny = std::max(1, static_cast<int>((cfg.domain.y - 2.0 * wall_gap) / spacing));
    const double x0 = 0.5 * (cfg.domain.x - (nx - 1) * spacing);
    const double y0 = 0.5 * (cfg.domain.y - (ny - 1) * spacing);

    int id = 0;
    for (int layer = 0; id < cfg.particle_count; ++layer) {
        const double z = wall_gap + r + layer * spacing;
        if (z + r + wall_gap > cfg.domain.z)
            throw ConfigError("bed generator ran out of room for " +
                              std::to_string(cfg.particle_count) + " particles");
        for (int j = 0; j < ny && id < cfg.particle_count; ++j)
            for (int i = 0; i < nx && id < cfg.particle_count; ++i) {
                dem::Particle p;
                p.id = id++;
                p.r = r;
                p.m = cfg.density_ratio * (4.0 / 3.0) * dem::kPi * r * r * r;
                p.x = {x0 + i * spacing + jitter * (2.0 * uniform01(rng) - 1.0),
                       y0 + j * spacing + jitter * (2.0 * uniform01(rng) - 1.0),
                       z + jitter * (2.0 * uniform01(rng) - 1.0)};
                out.push_back(p);
            }
    }
    return out;
}

}  // namespace

std::vector<dem::Particle> generate_particles(const ScenarioConfig& cfg) {
    if (cfg.particle_count == 0) return {};
    if (cfg.scenario == "settling_sphere") {
        dem::Particle p;
        p.id = 0;
        p.r = cfg.particle_radius;
        p.m = cfg.density_ratio * p.volume();
        p.x = {0.5 * cfg.domain.x, 0.5 * cfg.domain.y, 0.75 * cfg.domain.z};
        return {p};
    }
    return jittered_bed(cfg);
}

std::vector<dem::WallPlane> domain_walls(const ScenarioConfig& cfg) {
    std::vector<dem::WallPlane> walls;
    for (int face = 0; face < 6; ++face) {
        if (cfg.bc.faces[face].kind == lbm::BcKind::periodic) continue;
        dem::WallPlane w;
        w.id = -(face + 1);
        const int axis = face / 2;
        Vec3 n{};
        n[axis] = face % 2 == 0 ? 1.0 : -1.0;
        w.normal = n;
        w.point = face % 2 == 0 ? Vec3{0.0, 0.0, 0.0}
                                : Vec3{static_cast<double>(cfg.domain.x),
                                       static_cast<double>(cfg.domain.y),
                                       static_cast<double>(cfg.domain.z)};
        walls.push_back(w);
    }
    return walls;
}

std::unique_ptr<Simulation> build_scenario(const ScenarioConfig& cfg) {
    cfg.validate();

    std::array<bool, 3> periodic{};
    for (int a = 0; a < 3; ++a) periodic[a] = cfg.bc.periodic_axis(a);

    auto decomp = partition::decompose(cfg.domain, cfg.blocks, periodic, cfg.workers);

    SimParams params;
    params.fluid = cfg.fluid;
    params.bc = cfg.bc;
    params.dem = cfg.dem;
    params.kernels = cfg.kernels;
    params.coupling = cfg.coupling;
    params.subdivisions = cfg.subdivisions;

    std::unique_ptr<partition::Scheduler> sched;
    if (cfg.workers > 1)
        sched = std::make_unique<partition::ThreadPoolScheduler>(
            std::min(cfg.workers, cfg.blocks.x * cfg.blocks.y * cfg.blocks.z));
    else
        sched = std::make_unique<partition::SerialScheduler>();

    auto sim = std::make_unique<Simulation>(std::move(decomp), params, std::move(sched));
    sim->initialize_fluid(1.0, Vec3{});
    sim->set_walls(domain_walls(cfg));

    const auto particles = generate_particles(cfg);
    if (!particles.empty()) {
        // Overlapping initial placements are a generation error.
        for (std::size_t i = 0; i < particles.size(); ++i)
            for (std::size_t j = i + 1; j < particles.size(); ++j) {
                const double overlap =
                    particles[i].r + particles[j].r - norm(particles[i].x - particles[j].x);
                if (overlap > 1e-9)
                    throw ConfigError("generated particles " + std::to_string(particles[i].id) +
                                      " and " + std::to_string(particles[j].id) +
                                      " overlap at initialization");
            }
        sim->add_particles(particles);
        if (cfg.settle_subcycles > 0) sim->settle_substeps(cfg.settle_subcycles);
    }
    return sim;
}

}  // namespace lbdem::io
