// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "lbdem/errors.hpp"
#include "lbdem/vec3.hpp"

namespace lbdem::perf {

/// Per-module timing categories matching the run-time breakdown the reports
/// are compared against.
enum class Category : int {
    kPsm = 0,
    kPsmComm,
    kMapping,
    kSetU,
    kRedF,
    kPd,
    kPdComm,
    kOther,
};
inline constexpr int kCategories = 8;
const char* category_name(Category c);

/// Worker-local wall-clock accumulator.
struct Timings {
    std::array<double, kCategories> seconds{};

    void add(Category c, double s) { seconds[static_cast<int>(c)] += s; }
    double get(Category c) const { return seconds[static_cast<int>(c)]; }
};

class ScopedTimer {
public:
    ScopedTimer(Timings& t, Category c)
        : timings_(t), cat_(c), start_(std::chrono::steady_clock::now()) {}
    ~ScopedTimer() {
        const auto end = std::chrono::steady_clock::now();
        timings_.add(cat_, std::chrono::duration<double>(end - start_).count());
    }

private:
    Timings& timings_;
    Category cat_;
    std::chrono::steady_clock::time_point start_;
};

/// Per-run timing summary; per-step times are the max across workers for each
/// category (the conservative aggregate), "other" is the residual against the
/// measured total.
struct TimingReport {
    std::array<double, kCategories> ms_per_step{};
    double total_ms_per_step = 0.0;
    long steps = 0;
    long cells = 0;
    int workers = 1;

    static TimingReport assemble(const std::vector<Timings>& per_worker, double total_seconds,
                                 long steps, long cells, int workers);
    std::string to_table() const;
};

struct MachineModel {
    double bandwidth_fast_gbs = 1400.0;  ///< accelerator-class memory
    double bandwidth_slow_gbs = 70.0;    ///< host-class memory
    double bytes_per_cell_update = 304.0;

    void validate() const {
        if (bandwidth_fast_gbs <= 0 || bandwidth_slow_gbs <= 0)
            throw ConfigError("machine-model bandwidths must be positive");
    }
};

/// Bandwidth-bound lower limit on the kernel time per step, in milliseconds.
double roofline_tmin_ms(const MachineModel& model, double cells);

/// Amdahl-style a priori speedup of accelerating the memory-bound fraction
/// frac_acc from bw_slow to bw_fast.
double hybrid_speedup(double frac_acc, double bw_slow, double bw_fast);

/// Million lattice-cell updates per second.
double mlups(double cells, double steps, double seconds);

/// Per-worker throughput normalized by the first (1-worker) entry.
std::vector<double> parallel_efficiency(const std::vector<double>& mlups_per_worker);

enum class ScalingMode { weak, strong };

struct ScalingRow {
    int workers = 1;
    Vec3i domain{};
    Vec3i blocks{};
    long cells = 0;
    double best_seconds = 0.0;
    int repetitions = 0;
    double mlups = 0.0;
    double mlups_per_worker = 0.0;
    double efficiency = 1.0;
    TimingReport report;
};

struct ScalingResult {
    ScalingMode mode = ScalingMode::weak;
    long steps = 0;
    std::vector<ScalingRow> rows;
    std::string to_table() const;
};

/// One benchmark execution: runs `steps` fluid steps of the scenario on the
/// given domain/block grid with one worker per block, returning the elapsed
/// seconds and the per-worker timings. Injectable so the harness logic is
/// testable with synthetic timings.
struct RunResult {
    double seconds = 0.0;
    std::vector<Timings> per_worker;
};
using RunFn = std::function<RunResult(const Vec3i& domain, const Vec3i& blocks, int workers,
                                      long steps, int repetition)>;

/// Runs the scenario at each worker count with >= 3 repetitions, keeps the
/// best sample per count. Weak mode doubles the domain alternately per
/// direction (x, y, z, x, ...) with the block grid; strong mode keeps the
/// domain fixed. Worker counts must be powers of two covering the doubling.
ScalingResult scaling_harness(ScalingMode mode, const Vec3i& base_domain,
                              const std::vector<int>& worker_counts, long steps,
                              int repetitions, const RunFn& run);

}  // namespace lbdem::perf
