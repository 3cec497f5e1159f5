// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lbdem/config.hpp"
#include "lbdem/output.hpp"
#include "lbdem/scenario.hpp"

using namespace lbdem;
using namespace lbdem::io;

TEST_CASE("minimal poiseuille config fills defaults and validates") {
    const char* text = R"({
        "preset": "poiseuille",
        "run": { "steps": 10 }
    })";
    const ScenarioConfig cfg = parse_config(text);
    CHECK(cfg.scenario == "poiseuille");
    CHECK(cfg.steps == 10);
    CHECK(cfg.fluid.tau == 0.8);
    CHECK_FALSE(cfg.coupling);
}

TEST_CASE("tau below 1/2 is rejected with the violation listed") {
    const char* text = R"({ "fluid": { "tau": 0.4 } })";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("tau") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected in strict mode") {
    const char* text = R"({ "fluid": { "tau": 0.8, "viscosityy": 0.1 } })";
    CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("dense desk preset carries the published particle parameters") {
    const ScenarioConfig cfg = preset_fluidized_bed_dense(5);
    CHECK(cfg.particle_radius == 10.0);
    CHECK(cfg.density_ratio == doctest::Approx(1.1));
    CHECK(cfg.dem.subcycles == 10);
    CHECK(cfg.domain == Vec3i{100, 40, 160});
    // 8073 particles scaled by the volume ratio 1/125.
    CHECK(cfg.particle_count == 65);
}

TEST_CASE("dilute preset scales 627 particles by the volume ratio") {
    CHECK(preset_fluidized_bed_dilute(5).particle_count == 5);   // 627/125 -> 5
    CHECK(preset_fluidized_bed_dilute(10).particle_count == 1);  // 627/1000 -> 1
    CHECK(preset_fluidized_bed_dilute(1).particle_count == 627);
    CHECK_THROWS_AS(preset_fluidized_bed_dilute(3), ConfigError);
}

TEST_CASE("unit conversion honors Galileo number and density ratio exactly") {
    ScenarioConfig cfg;
    cfg.physical = PhysicalInputs{};  // Ga 8.9, ratio 1.1, d 20, u_g 0.02
    apply_unit_conversion(cfg);
    const double nu = cfg.fluid.nu();
    const double g = -cfg.dem.gravity.z;
    const double d = 2.0 * cfg.particle_radius;
    // Reconstruct Ga = sqrt((rho_r - 1) g d) d / nu from the lattice values.
    const double ga = std::sqrt(0.1 * g * d) * d / nu;
    CHECK(ga == doctest::Approx(8.9).epsilon(1e-12));
    CHECK(cfg.u_inflow == doctest::Approx(1.0 * nu / d).epsilon(1e-12));  // Re_p = 1
    CHECK(cfg.fluid.tau > 0.5);
}

TEST_CASE("config round trip: load -> serialize -> load is the identity") {
    ScenarioConfig cfg = preset_fluidized_bed_dilute(5);
    cfg.seed = 1234;
    cfg.workers = 2;
    const std::string text = serialize_config(cfg);
    const ScenarioConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("settling preset builds a single centered particle") {
    const ScenarioConfig cfg = preset_settling_sphere();
    const auto ps = generate_particles(cfg);
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].x.x == doctest::Approx(cfg.domain.x / 2.0));
    CHECK(ps[0].x.y == doctest::Approx(cfg.domain.y / 2.0));
    CHECK(ps[0].r == 10.0);
    // Six walls for the all-no-slip box.
    CHECK(domain_walls(cfg).size() == 6);
}

TEST_CASE("bed generator is deterministic and non-overlapping") {
    ScenarioConfig cfg = preset_fluidized_bed_dilute(5);
    const auto a = generate_particles(cfg);
    const auto b = generate_particles(cfg);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            CHECK(norm(a[j].x - a[i].x) > a[i].r + a[j].r);

    cfg.seed = 99;
    const auto c = generate_particles(cfg);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(c[i].x == a[i].x)) same = false;
    CHECK_FALSE(same);
}

TEST_CASE("output cadence: 10 steps at cadence 5 writes dumps 0, 5, 10") {
    const std::string dir = std::filesystem::temp_directory_path().string() + "/lbdem_out_test";
    std::filesystem::remove_all(dir);

    io::ScenarioConfig cfg;
    cfg.scenario = "custom";
    cfg.domain = {8, 8, 8};
    cfg.fluid.tau = 0.8;
    cfg.coupling = false;
    auto sim = build_scenario(cfg);

    OutputWriter writer(dir, 5);
    writer.on_step(*sim);
    for (int s = 0; s < 10; ++s) {
        sim->step();
        writer.on_step(*sim);
    }
    writer.finalize(*sim);
    CHECK(writer.grid_dumps_written() == 3);
    CHECK(std::filesystem::exists(dir + "/grid_000000.dat"));
    CHECK(std::filesystem::exists(dir + "/grid_000005.dat"));
    CHECK(std::filesystem::exists(dir + "/grid_000010.dat"));
    CHECK(std::filesystem::exists(dir + "/series.tsv"));

    // Cadence 0: only the final state.
    std::filesystem::remove_all(dir);
    auto sim2 = build_scenario(cfg);
    OutputWriter writer2(dir, 0);
    writer2.on_step(*sim2);
    for (int s = 0; s < 10; ++s) {
        sim2->step();
        writer2.on_step(*sim2);
    }
    writer2.finalize(*sim2);
    CHECK(writer2.grid_dumps_written() == 1);
    CHECK(std::filesystem::exists(dir + "/grid_000010.dat"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("same seed and config give a byte-identical scalar series") {
    io::ScenarioConfig cfg = preset_fluidized_bed_dilute(10);
    cfg.steps = 3;
    auto run_series = [&] {
        auto sim = build_scenario(cfg);
        io::OutputWriter w(
            std::filesystem::temp_directory_path().string() + "/lbdem_series_test", 0);
        w.on_step(*sim);
        for (int s = 0; s < 3; ++s) {
            sim->step();
            w.on_step(*sim);
        }
        return w.series_text();
    };
    const std::string a = run_series();
    const std::string b = run_series();
    CHECK(a == b);
}

TEST_CASE("missing config file raises an I/O error with the path") {
    try {
        load_config("/nonexistent/path/cfg.json");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/path/cfg.json") != std::string::npos);
    }
}
