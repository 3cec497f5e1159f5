// SPDX-License-Identifier: Apache-2.0
//
// Times the fused collide-stream kernels, serial reference vs OpenMP, for the
// plain fluid path and the coupled path with a resolved sphere in the domain.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "lbdem/boundary.hpp"
#include "lbdem/psm.hpp"

using namespace lbdem;

namespace {

double time_steps(PdfField& field, int steps, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int s = 0; s < steps; ++s) {
        lbm::fill_periodic_ghosts(field, {true, true, true});
        body();
        field.swap();
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, long cells, int steps, double seconds) {
    std::printf("%-16s %8.3f s   %8.1f MLUPs\n", name, seconds,
                cells * static_cast<double>(steps) / seconds / 1e6);
}

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 96;
    int steps = argc > 2 ? std::atoi(argv[2]) : 20;
    const long cells = static_cast<long>(n) * n * n;
    std::printf("domain %d^3 (%ld cells), %d steps per variant\n", n, cells, steps);

    lbm::FluidParams params;
    params.tau = 0.8;
    const CellBox all{{0, 0, 0}, {n, n, n}};

    PdfField field(n, n, n);
    const auto feq = lbm::equilibrium(1.0, {0.02, 0.0, 0.0});
    field.fill_src(feq);

    report("LBM serial", cells, steps,
           time_steps(field, steps, [&] { lbm::collide_stream_serial(field, params, all); }));
    report("LBM OpenMP", cells, steps,
           time_steps(field, steps, [&] { lbm::collide_stream_omp(field, params, all); }));

    // Coupled kernel with one resolved sphere (r = n/8) held in the center.
    std::vector<psm::ParticleSnapshot> snaps(1);
    snaps[0].id = 0;
    snaps[0].x = {n / 2.0, n / 2.0, n / 2.0};
    snaps[0].r = n / 8.0;
    snaps[0].f_r = psm::f_of_r(snaps[0].r);

    FractionField frac;
    psm::SubBlockRegistry registry;
    registry.build(all, snaps);
    psm::build_fraction_field(frac, all, registry, snaps, true);
    SolidVelocityField svel;
    psm::set_solid_velocities(svel, frac, all, snaps, true);
    CellMomentumScratch scratch;
    scratch.resize(frac.cells());

    field.fill_src(feq);
    report("PSM serial", cells, steps, time_steps(field, steps, [&] {
               psm::psm_collide_stream_serial(field, params, frac, svel, scratch, all);
           }));
    report("PSM OpenMP", cells, steps, time_steps(field, steps, [&] {
               psm::psm_collide_stream_omp(field, params, frac, svel, scratch, all);
           }));
    return 0;
}
