// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scenario runs, validation cases, scaling
// benchmarks and the analytic performance models.

#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "lbdem/config.hpp"
#include "lbdem/output.hpp"
#include "lbdem/perf.hpp"
#include "lbdem/scenario.hpp"
#include "lbdem/validation.hpp"

namespace {

using namespace lbdem;

int cmd_run(const std::string& config_path, const std::string& out_override) {
    io::ScenarioConfig cfg = io::load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;

    auto sim = io::build_scenario(cfg);
    io::OutputWriter writer(cfg.out_dir, cfg.output_every);
    writer.on_step(*sim);  // initial state

    sim->reset_timers();
    const auto t0 = std::chrono::steady_clock::now();
    for (long s = 0; s < cfg.steps; ++s) {
        sim->step();
        writer.on_step(*sim);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    writer.finalize(*sim);

    const long cells = static_cast<long>(cfg.domain.x) * cfg.domain.y * cfg.domain.z;
    auto report = perf::TimingReport::assemble(sim->timings_per_worker(), seconds, cfg.steps,
                                               cells, sim->decomposition().workers);
    std::cout << report.to_table();
    std::cout << "# scenario_hash " << std::hex << io::config_hash(cfg) << std::dec << "\n";
    std::cout << "# workers " << sim->decomposition().workers << "\n";
    std::cout << "# git_rev " << LBDEM_GIT_REV << "\n";
    std::cout << "# mlups "
              << perf::mlups(static_cast<double>(cells), static_cast<double>(cfg.steps),
                             seconds)
              << "\n";
    io::write_text_file(cfg.out_dir + "/timing.tsv", report.to_table());
    return 0;
}

int cmd_validate(const std::string& name) {
    if (name == "poiseuille") {
        const auto r = validation::poiseuille();
        std::printf("poiseuille: u_centerline=%.8g analytic=%.8g rel_err=%.3g%% -> %s\n",
                    r.u_measured, r.u_analytic, 100.0 * r.rel_err, r.pass ? "PASS" : "FAIL");
        return r.pass ? 0 : 3;
    }
    if (name == "mass") {
        const auto r = validation::mass_conservation();
        std::printf("mass conservation: drift=%.3g -> %s\n", r.drift, r.pass ? "PASS" : "FAIL");
        return r.pass ? 0 : 3;
    }
    if (name == "momentum") {
        const auto r = validation::psm_momentum_bookkeeping();
        std::printf("coupling momentum bookkeeping: max residual=%.3g -> %s\n", r.max_residual,
                    r.pass ? "PASS" : "FAIL");
        return r.pass ? 0 : 3;
    }
    if (name == "degeneracy") {
        const auto r = validation::psm_degeneracy();
        std::printf("coupled-vs-plain fields after %ld steps: %s\n", r.steps,
                    r.bitwise_equal ? "bitwise equal -> PASS" : "differ -> FAIL");
        return r.bitwise_equal ? 0 : 3;
    }
    if (name == "settling") {
        const auto r = validation::settling_sphere();
        std::printf("settling sphere: u_t=%.6g Re=%.4g predicted=%.4g drift=%.3g%% steps=%ld "
                    "-> %s\n",
                    r.u_terminal, r.re_measured, r.re_predicted, 100.0 * r.drift, r.steps_run,
                    r.pass ? "PASS" : "FAIL");
        return r.pass ? 0 : 3;
    }
    if (name == "decomposition") {
        const auto r = validation::decomposition_invariance();
        std::printf("decomposition invariance: field diff=%.3g particle diff=%.3g -> %s\n",
                    r.max_field_diff, r.max_particle_diff, r.pass ? "PASS" : "FAIL");
        return r.pass ? 0 : 3;
    }
    throw ConfigError("unknown validation case '" + name +
                      "' (poiseuille, mass, momentum, degeneracy, settling, decomposition)");
}

perf::RunFn scenario_runner(const io::ScenarioConfig& base) {
    const long base_cells =
        static_cast<long>(base.domain.x) * base.domain.y * base.domain.z;
    return [base, base_cells](const Vec3i& domain, const Vec3i& blocks, int workers,
                              long steps, int) {
        io::ScenarioConfig cfg = base;
        cfg.domain = domain;
        cfg.blocks = blocks;
        cfg.workers = workers;
        const long cells = static_cast<long>(domain.x) * domain.y * domain.z;
        cfg.particle_count = std::max(
            1, static_cast<int>(base.particle_count * (cells / static_cast<double>(base_cells))));
        auto sim = io::build_scenario(cfg);
        sim->reset_timers();
        const auto t0 = std::chrono::steady_clock::now();
        sim->run(steps);
        perf::RunResult rr;
        rr.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rr.per_worker = sim->timings_per_worker();
        return rr;
    };
}

int cmd_scale(const std::string& config_path, const std::string& mode_str,
              std::vector<int> workers, long steps, int reps) {
    io::ScenarioConfig base = io::load_config(config_path);
    const perf::ScalingMode mode =
        mode_str == "weak" ? perf::ScalingMode::weak : perf::ScalingMode::strong;
    auto result = perf::scaling_harness(mode, base.domain, workers, steps, reps,
                                        scenario_runner(base));
    std::cout << result.to_table();
    for (const auto& row : result.rows) {
        std::cout << "# workers " << row.workers << "\n";
        std::cout << row.report.to_table();
    }
    return 0;
}

int cmd_perf_model(bool tmin, bool speedup, double bytes, double cells, double bw_fast,
                   double bw_slow, double frac) {
    if (tmin) {
        perf::MachineModel model;
        model.bytes_per_cell_update = bytes;
        model.bandwidth_fast_gbs = bw_fast;
        const double ms = perf::roofline_tmin_ms(model, cells);
        std::printf("T_min = %.3g ms/time step\n", ms);
    }
    if (speedup) {
        const double s = perf::hybrid_speedup(frac, bw_slow, bw_fast);
        std::printf("S_hyb = %.3g\n", s);
    }
    if (!tmin && !speedup)
        throw ConfigError("perf-model: request --tmin and/or --speedup");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-parallel coupled lattice-Boltzmann / DEM simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, case_name, mode = "weak";
    std::vector<int> workers{1, 2, 4, 8};
    long steps = 10;
    int reps = 3;
    bool tmin = false, speedup = false;
    double bytes = 304.0, cells = 8e7, bw_fast = 1400.0, bw_slow = 70.0, frac = 0.95;

    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--out", out_dir, "override the output directory");

    auto* validate = app.add_subcommand("validate", "run a named validation case");
    validate->add_option("case", case_name,
                         "poiseuille | mass | momentum | degeneracy | settling | decomposition")
        ->required();

    auto* scale = app.add_subcommand("scale", "weak/strong scaling benchmark");
    scale->add_option("config", config_path, "JSON config file")->required();
    scale->add_option("--mode", mode, "weak | strong")
        ->check(CLI::IsMember({"weak", "strong"}));
    scale->add_option("--workers", workers, "worker counts (powers of two)");
    scale->add_option("--steps", steps, "fluid steps per repetition");
    scale->add_option("--reps", reps, "repetitions per worker count (>= 3)");

    auto* pm = app.add_subcommand("perf-model", "analytic performance models");
    pm->add_flag("--tmin", tmin, "bandwidth roofline minimum time per step");
    pm->add_flag("--speedup", speedup, "a priori hybrid speedup");
    pm->add_option("--bytes", bytes, "bytes per cell update");
    pm->add_option("--cells", cells, "lattice cells");
    pm->add_option("--bw-fast", bw_fast, "fast (accelerator) bandwidth, GB/s");
    pm->add_option("--bw-slow", bw_slow, "slow (host) bandwidth, GB/s");
    pm->add_option("--frac", frac, "accelerated run-time fraction");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (validate->parsed()) return cmd_validate(case_name);
        if (scale->parsed()) return cmd_scale(config_path, mode, workers, steps, reps);
        if (pm->parsed()) return cmd_perf_model(tmin, speedup, bytes, cells, bw_fast, bw_slow, frac);
    } catch (const lbdem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lbdem::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const lbdem::SyncError& e) {
        std::cerr << "sync error: " << e.what() << "\n";
        return 3;
    } catch (const lbdem::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
