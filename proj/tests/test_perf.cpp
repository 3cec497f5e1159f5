// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lbdem/perf.hpp"

using namespace lbdem;
using namespace lbdem::perf;

TEST_CASE("roofline minimum time reproduces the reference number") {
    MachineModel model;  // 304 B, 1400 GB/s defaults
    const double ms = roofline_tmin_ms(model, 8e7);
    CHECK(ms == doctest::Approx(17.4).epsilon(0.005));  // 3 significant figures
    CHECK(roofline_tmin_ms(model, 0.0) == 0.0);
    model.bandwidth_fast_gbs = 700.0;
    CHECK(roofline_tmin_ms(model, 8e7) == doctest::Approx(2.0 * ms).epsilon(1e-12));
}

TEST_CASE("hybrid speedup estimate and its edge cases") {
    CHECK(hybrid_speedup(0.95, 70.0, 1400.0) == doctest::Approx(10.3).epsilon(0.005));
    CHECK(hybrid_speedup(0.0, 70.0, 1400.0) == 1.0);
    CHECK(hybrid_speedup(0.6, 500.0, 500.0) == 1.0);
}

TEST_CASE("MLUPs arithmetic") {
    CHECK(mlups(8e7, 500.0, 500.0 * 0.0397) == doctest::Approx(2015.1).epsilon(1e-3));
    CHECK(mlups(8e7, 0.0, 1.0) == 0.0);
    CHECK(mlups(1e6, 200.0, 4.0) == doctest::Approx(mlups(1e6, 100.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("parallel efficiency reproduces the reference endpoints") {
    const auto dilute = parallel_efficiency({2027.3, 1435.99});
    CHECK(dilute[0] == 1.0);
    CHECK(dilute[1] == doctest::Approx(0.71).epsilon(0.01));

    const auto dense = parallel_efficiency({706.613, 377.581});
    CHECK(dense[1] == doctest::Approx(0.53).epsilon(0.01));

    const auto flat = parallel_efficiency({5.0, 5.0, 5.0});
    for (double e : flat) CHECK(e == 1.0);

    CHECK_THROWS_AS(parallel_efficiency({}), ConfigError);
}

TEST_CASE("timing report: max across workers and the residual category") {
    std::vector<Timings> workers(2);
    workers[0].add(Category::kPsm, 1.0);
    workers[1].add(Category::kPsm, 2.0);
    workers[0].add(Category::kPd, 0.5);
    const auto r = TimingReport::assemble(workers, 4.0, 100, 1000, 2);
    CHECK(r.ms_per_step[static_cast<int>(Category::kPsm)] == doctest::Approx(20.0));
    CHECK(r.ms_per_step[static_cast<int>(Category::kPd)] == doctest::Approx(5.0));
    // other = total(40) - named(25)
    CHECK(r.ms_per_step[static_cast<int>(Category::kOther)] == doctest::Approx(15.0));
    const std::string table = r.to_table();
    for (const char* key : {"PSM", "PSM-comm", "mapping", "setU", "redF", "PD", "PD-comm",
                            "other", "total"})
        CHECK(table.find(key) != std::string::npos);
}

namespace {

/// Synthetic runner: deterministic fake seconds, slowest first repetition.
RunFn synthetic_runner(std::vector<double>* seen_cells_per_worker) {
    return [seen_cells_per_worker](const Vec3i& domain, const Vec3i& blocks, int workers,
                                   long steps, int rep) {
        (void)blocks;
        RunResult rr;
        const double cells = static_cast<double>(domain.x) * domain.y * domain.z;
        if (seen_cells_per_worker) seen_cells_per_worker->push_back(cells / workers);
        // Monotone slowdown with worker count, best at the last repetition.
        rr.seconds = steps * 1e-6 * cells / workers * (1.0 + 0.1 * workers) *
                     (1.0 + 0.5 * (2 - rep) / 3.0);
        rr.per_worker.assign(workers, Timings{});
        return rr;
    };
}

}  // namespace

TEST_CASE("weak scaling harness: structure, best-of-3, hand-computed efficiencies") {
    std::vector<double> cells_per_worker;
    const auto result = scaling_harness(ScalingMode::weak, {32, 16, 16}, {1, 2, 4, 8}, 10, 3,
                                        synthetic_runner(&cells_per_worker));
    REQUIRE(result.rows.size() == 4);

    // Per-worker cells constant in weak mode.
    for (const auto& row : result.rows)
        CHECK(row.cells / row.workers == 32L * 16 * 16);

    // Block grid doubles alternately in x, y, z.
    CHECK(result.rows[1].blocks == Vec3i{2, 1, 1});
    CHECK(result.rows[2].blocks == Vec3i{2, 2, 1});
    CHECK(result.rows[3].blocks == Vec3i{2, 2, 2});

    // Best-of-3 keeps the fastest repetition (rep = 2 by construction).
    const double cells1 = 32.0 * 16 * 16;
    const double expect_best = 10 * 1e-6 * cells1 * 1.1;
    CHECK(result.rows[0].best_seconds == doctest::Approx(expect_best).epsilon(1e-12));

    // Efficiency column matches the hand-computed per-worker throughput ratio:
    // eff(N) = (1 + 0.1) / (1 + 0.1 N).
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const double n = result.rows[i].workers;
        CHECK(result.rows[i].efficiency == doctest::Approx(1.1 / (1.0 + 0.1 * n)).epsilon(1e-9));
    }

    const std::string table = result.to_table();
    CHECK(table.find("efficiency") != std::string::npos);
}

TEST_CASE("strong scaling keeps the total cells constant and validates divisibility") {
    const auto result = scaling_harness(ScalingMode::strong, {32, 32, 32}, {1, 2, 4}, 5, 3,
                                        synthetic_runner(nullptr));
    REQUIRE(result.rows.size() == 3);
    for (const auto& row : result.rows) CHECK(row.cells == 32L * 32 * 32);

    CHECK_THROWS_AS(scaling_harness(ScalingMode::strong, {33, 32, 32}, {1, 2}, 5, 3,
                                    synthetic_runner(nullptr)),
                    ConfigError);
    CHECK_THROWS_AS(scaling_harness(ScalingMode::weak, {32, 32, 32}, {3}, 5, 3,
                                    synthetic_runner(nullptr)),
                    ConfigError);
}
