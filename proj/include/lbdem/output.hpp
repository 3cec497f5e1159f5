// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "lbdem/sim.hpp"

namespace lbdem::io {

/// One row of the per-step scalar series.
struct ScalarSample {
    long step = 0;
    double mass = 0.0;
    Vec3 momentum{};        ///< bare fluid momentum (no half-force shift)
    double fluid_ke = 0.0;
    double particle_ke = 0.0;
    double min_gap = 0.0;   ///< min surface gap between particles; inf if < 2
    double max_u = 0.0;     ///< max |U_f| over all cells
};

ScalarSample sample_scalars(const Simulation& sim);

/// Grid dump: text records `x y z rho ux uy uz B`, one line per cell, blocks
/// in ascending id and cells lexicographic within each block. The header
/// carries the step index and domain dims.
void write_grid_dump(const Simulation& sim, const std::string& path);

/// Particle dump: text records `id x y z ux uy uz wx wy wz r`.
void write_particle_dump(const Simulation& sim, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

/// Zero-padded step-indexed file name, e.g. grid_000010.dat.
std::string dump_filename(const std::string& prefix, long step);

/// Drives dumps and the scalar series for a run: with cadence 0 only the
/// final state is dumped; otherwise every `cadence` steps including step 0
/// and the final step. The scalar series covers every step.
class OutputWriter {
public:
    OutputWriter(std::string dir, long cadence);

    void on_step(const Simulation& sim);  ///< call after each step (and once at step 0)
    void finalize(const Simulation& sim);
    const std::vector<ScalarSample>& series() const { return series_; }
    std::string series_text() const;
    int grid_dumps_written() const { return grid_dumps_; }

private:
    void dump(const Simulation& sim);

    std::string dir_;
    long cadence_;
    std::vector<ScalarSample> series_;
    int grid_dumps_ = 0;
    long last_dumped_ = -1;
};

}  // namespace lbdem::io
