// SPDX-License-Identifier: Apache-2.0
#include "lbdem/perf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lbdem::perf {

const char* category_name(Category c) {
    switch (c) {
        case Category::kPsm: return "PSM";
        case Category::kPsmComm: return "PSM-comm";
        case Category::kMapping: return "mapping";
        case Category::kSetU: return "setU";
        case Category::kRedF: return "redF";
        case Category::kPd: return "PD";
        case Category::kPdComm: return "PD-comm";
        case Category::kOther: return "other";
    }
    return "?";
}

TimingReport TimingReport::assemble(const std::vector<Timings>& per_worker,
                                    double total_seconds, long steps, long cells,
                                    int workers) {
    TimingReport r;
    r.steps = steps;
    r.cells = cells;
    r.workers = workers;
    r.total_ms_per_step = steps > 0 ? total_seconds * 1e3 / steps : 0.0;

    double named_ms = 0.0;
    for (int c = 0; c < kCategories - 1; ++c) {
        double max_s = 0.0;
        for (const Timings& t : per_worker) max_s = std::max(max_s, t.seconds[c]);
        r.ms_per_step[c] = steps > 0 ? max_s * 1e3 / steps : 0.0;
        named_ms += r.ms_per_step[c];
    }
    // Residual category, mirroring how the breakdown treats everything else.
    r.ms_per_step[static_cast<int>(Category::kOther)] =
        std::max(0.0, r.total_ms_per_step - named_ms);
    return r;
}

std::string TimingReport::to_table() const {
    std::ostringstream os;
    os << "module\tms_per_step\n";
    os.precision(6);
    for (int c = 0; c < kCategories; ++c)
        os << category_name(static_cast<Category>(c)) << '\t' << ms_per_step[c] << '\n';
    os << "total\t" << total_ms_per_step << '\n';
    return os.str();
}

double roofline_tmin_ms(const MachineModel& model, double cells) {
    model.validate();
    const double bytes = model.bytes_per_cell_update * cells;
    const double seconds = bytes / (model.bandwidth_fast_gbs * 1e9);
    return seconds * 1e3;
}

double hybrid_speedup(double frac_acc, double bw_slow, double bw_fast) {
    return 1.0 / (1.0 + frac_acc * (bw_slow / bw_fast - 1.0));
}

double mlups(double cells, double steps, double seconds) {
    if (steps <= 0.0) return 0.0;
    return cells * steps / seconds / 1e6;
}

std::vector<double> parallel_efficiency(const std::vector<double>& mlups_per_worker) {
    if (mlups_per_worker.empty())
        throw ConfigError("parallel efficiency needs a non-empty series");
    const double base = mlups_per_worker.front();
    if (!(base > 0.0))
        throw ConfigError("parallel efficiency needs a positive 1-worker baseline");
    std::vector<double> eff;
    eff.reserve(mlups_per_worker.size());
    for (double v : mlups_per_worker) eff.push_back(v / base);
    return eff;
}

std::string ScalingResult::to_table() const {
    std::ostringstream os;
    os << (mode == ScalingMode::weak ? "# mode weak" : "# mode strong") << "\n";
    os << "workers\tdomain\tcells\tcells_per_worker\treps\tbest_s\tmlups\tmlups_per_worker"
          "\tefficiency\n";
    os.precision(6);
    for (const ScalingRow& r : rows) {
        os << r.workers << '\t' << r.domain.x << 'x' << r.domain.y << 'x' << r.domain.z << '\t'
           << r.cells << '\t' << r.cells / r.workers << '\t' << r.repetitions << '\t'
           << r.best_seconds << '\t' << r.mlups << '\t' << r.mlups_per_worker << '\t'
           << r.efficiency << '\n';
    }
    return os.str();
}

ScalingResult scaling_harness(ScalingMode mode, const Vec3i& base_domain,
                              const std::vector<int>& worker_counts, long steps,
                              int repetitions, const RunFn& run) {
    if (worker_counts.empty()) throw ConfigError("scaling harness needs worker counts");
    if (repetitions < 3) repetitions = 3;  // at least three runs, best sample kept

    ScalingResult result;
    result.mode = mode;
    result.steps = steps;

    for (int workers : worker_counts) {
        // workers = 2^m with the domain/blocks doubled alternately in x, y, z.
        int m = 0;
        while ((1 << m) < workers) ++m;
        if ((1 << m) != workers)
            throw ConfigError("scaling worker counts must be powers of two (got " +
                              std::to_string(workers) + ")");

        Vec3i blocks{1, 1, 1};
        Vec3i domain = base_domain;
        for (int d = 0; d < m; ++d) {
            blocks[d % 3] *= 2;
            if (mode == ScalingMode::weak) domain[d % 3] *= 2;
        }
        if (mode == ScalingMode::strong) {
            for (int a = 0; a < 3; ++a)
                if (domain[a] % blocks[a] != 0)
                    throw ConfigError("strong scaling: block grid does not divide the domain");
        }

        ScalingRow row;
        row.workers = workers;
        row.domain = domain;
        row.blocks = blocks;
        row.cells = static_cast<long>(domain.x) * domain.y * domain.z;
        row.repetitions = repetitions;

        RunResult best;
        best.seconds = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < repetitions; ++rep) {
            RunResult rr = run(domain, blocks, workers, steps, rep);
            if (rr.seconds < best.seconds) best = std::move(rr);
        }
        row.best_seconds = best.seconds;
        row.mlups = mlups(static_cast<double>(row.cells), static_cast<double>(steps),
                          best.seconds);
        row.mlups_per_worker = row.mlups / workers;
        row.report = TimingReport::assemble(best.per_worker, best.seconds, steps, row.cells,
                                            workers);
        result.rows.push_back(std::move(row));
    }

    std::vector<double> series;
    for (const ScalingRow& r : result.rows) series.push_back(r.mlups_per_worker);
    const std::vector<double> eff = parallel_efficiency(series);
    for (std::size_t i = 0; i < result.rows.size(); ++i) result.rows[i].efficiency = eff[i];
    return result;
}

}  // namespace lbdem::perf
