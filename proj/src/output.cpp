// SPDX-License-Identifier: Apache-2.0
#include "lbdem/output.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace lbdem::io {

namespace {

void format_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

ScalarSample sample_scalars(const Simulation& sim) {
    ScalarSample s;
    s.step = sim.step_index();
    s.mass = sim.total_fluid_mass();
    s.momentum = sim.total_fluid_momentum();

    CompensatedSum ke;
    double max_u2 = 0.0;
    for (int b = 0; b < sim.num_blocks(); ++b) {
        const BlockState& blk = sim.block(b);
        const Vec3i d = blk.dims();
        for (int k = 0; k < d.z; ++k)
            for (int j = 0; j < d.y; ++j)
                for (int i = 0; i < d.x; ++i) {
                    double rho;
                    Vec3 u;
                    lbm::cell_macroscopic(blk.field, sim.params().fluid.f_ext, i, j, k, rho, u);
                    const double u2 = norm2(u);
                    ke.add(0.5 * rho * u2);
                    max_u2 = std::max(max_u2, u2);
                }
    }
    s.fluid_ke = ke.value();
    s.max_u = std::sqrt(max_u2);

    const auto particles = sim.gather_particles();
    CompensatedSum pke;
    for (const auto& p : particles)
        pke.add(0.5 * p.m * norm2(p.u) + 0.5 * p.inertia() * norm2(p.w));
    s.particle_ke = pke.value();

    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < particles.size(); ++i)
        for (std::size_t j = i + 1; j < particles.size(); ++j)
            min_gap = std::min(min_gap,
                               norm(particles[j].x - particles[i].x) - particles[i].r -
                                   particles[j].r);
    s.min_gap = min_gap;
    return s;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string dump_filename(const std::string& prefix, long step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_%06ld.dat", step);
    return prefix + buf;
}

void write_grid_dump(const Simulation& sim, const std::string& path) {
    std::ostringstream os;
    const Vec3i d = sim.decomposition().domain;
    os << "# grid step=" << sim.step_index() << " dims=" << d.x << ' ' << d.y << ' ' << d.z
       << "\n# columns: x y z rho ux uy uz B\n";
    for (int b = 0; b < sim.num_blocks(); ++b) {
        const BlockState& blk = sim.block(b);
        const Vec3i bd = blk.dims();
        for (int k = 0; k < bd.z; ++k)
            for (int j = 0; j < bd.y; ++j)
                for (int i = 0; i < bd.x; ++i) {
                    double rho;
                    Vec3 u;
                    lbm::cell_macroscopic(blk.field, sim.params().fluid.f_ext, i, j, k, rho, u);
                    const double frac =
                        sim.params().coupling ? blk.frac.btot[blk.frac.idx(i, j, k)] : 0.0;
                    os << blk.box.lo.x + i << ' ' << blk.box.lo.y + j << ' ' << blk.box.lo.z + k
                       << ' ';
                    format_double(os, rho);
                    os << ' ';
                    format_double(os, u.x);
                    os << ' ';
                    format_double(os, u.y);
                    os << ' ';
                    format_double(os, u.z);
                    os << ' ';
                    format_double(os, frac);
                    os << '\n';
                }
    }
    write_text_file(path, os.str());
}

void write_particle_dump(const Simulation& sim, const std::string& path) {
    std::ostringstream os;
    const auto particles = sim.gather_particles();
    os << "# particles step=" << sim.step_index() << " count=" << particles.size()
       << "\n# columns: id x y z ux uy uz wx wy wz r\n";
    for (const auto& p : particles) {
        os << p.id;
        for (double v : {p.x.x, p.x.y, p.x.z, p.u.x, p.u.y, p.u.z, p.w.x, p.w.y, p.w.z, p.r}) {
            os << ' ';
            format_double(os, v);
        }
        os << '\n';
    }
    write_text_file(path, os.str());
}

OutputWriter::OutputWriter(std::string dir, long cadence)
    : dir_(std::move(dir)), cadence_(cadence) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
}

void OutputWriter::dump(const Simulation& sim) {
    if (last_dumped_ == sim.step_index()) return;
    write_grid_dump(sim, dir_ + "/" + dump_filename("grid", sim.step_index()));
    write_particle_dump(sim, dir_ + "/" + dump_filename("particles", sim.step_index()));
    last_dumped_ = sim.step_index();
    ++grid_dumps_;
}

void OutputWriter::on_step(const Simulation& sim) {
    series_.push_back(sample_scalars(sim));
    if (cadence_ > 0 && sim.step_index() % cadence_ == 0) dump(sim);
}

void OutputWriter::finalize(const Simulation& sim) {
    dump(sim);
    write_text_file(dir_ + "/series.tsv", series_text());
}

std::string OutputWriter::series_text() const {
    std::ostringstream os;
    os << "step\tmass\tpx\tpy\tpz\tfluid_ke\tparticle_ke\tmin_gap\tmax_u\n";
    for (const ScalarSample& s : series_) {
        os << s.step;
        for (double v : {s.mass, s.momentum.x, s.momentum.y, s.momentum.z, s.fluid_ke,
                         s.particle_ke, s.min_gap, s.max_u}) {
            os << '\t';
            format_double(os, v);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace lbdem::io
