// SPDX-License-Identifier: Apache-2.0
#include "lbdem/lbm.hpp"

namespace lbdem::lbm {

void stream(PdfField& field, const CellBox& range) {
    for (int q = 0; q < kQ; ++q) {
        const double* __restrict s = field.src(q);
        double* __restrict d = field.dst(q);
        const long sh = field.shift(q);
        for (int k = range.lo.z; k < range.hi.z; ++k)
            for (int j = range.lo.y; j < range.hi.y; ++j) {
                long base = field.idx(range.lo.x, j, k);
                for (int i = range.lo.x; i < range.hi.x; ++i, ++base) d[base] = s[base - sh];
            }
    }
}

namespace {

template <bool kParallel>
void collide_stream_impl(PdfField& field, const FluidParams& params, const CellBox& range) {
    const double* __restrict srcp[kQ];
    double* __restrict dstp[kQ];
    long shifts[kQ];
    for (int q = 0; q < kQ; ++q) {
        srcp[q] = field.src(q);
        dstp[q] = field.dst(q);
        shifts[q] = field.shift(q);
    }
    const double inv_tau = kDt / params.tau;
    const Vec3 f_ext = params.f_ext;
    long bad = 0;

#pragma omp parallel for collapse(2) schedule(static) reduction(+ : bad) if (kParallel)
    for (int k = range.lo.z; k < range.hi.z; ++k)
        for (int j = range.lo.y; j < range.hi.y; ++j) {
            long base = field.idx(range.lo.x, j, k);
            for (int i = range.lo.x; i < range.hi.x; ++i, ++base) {
                Populations f;
                for (int q = 0; q < kQ; ++q) f[q] = srcp[q][base - shifts[q]];
                if (!collide_cell(f, f_ext, inv_tau)) ++bad;
                for (int q = 0; q < kQ; ++q) dstp[q][base] = f[q];
            }
        }
    if (bad > 0)
        throw NumericError("fluid instability: " + std::to_string(bad) +
                           " cells with rho <= 0 or |u| > " + std::to_string(kMaxVelocity));
}

}  // namespace

void collide_stream_serial(PdfField& field, const FluidParams& params, const CellBox& range) {
    collide_stream_impl<false>(field, params, range);
}

void collide_stream_omp(PdfField& field, const FluidParams& params, const CellBox& range) {
    collide_stream_impl<true>(field, params, range);
}

void cell_macroscopic(const PdfField& field, const Vec3& f_ext, int i, int j, int k,
                      double& rho, Vec3& u) {
    Populations f;
    const long base = field.idx(i, j, k);
    for (int q = 0; q < kQ; ++q) f[q] = field.src(q)[base];
    macroscopic(f, f_ext, rho, u);
}

double total_mass(const PdfField& field) {
    CompensatedSum mass;
    for (int k = 0; k < field.nz(); ++k)
        for (int j = 0; j < field.ny(); ++j)
            for (int i = 0; i < field.nx(); ++i) {
                const long base = field.idx(i, j, k);
                double rho = 0.0;
                for (int q = 0; q < kQ; ++q) rho += field.src(q)[base];
                mass.add(rho);
            }
    return mass.value();
}

Vec3 total_momentum(const PdfField& field) {
    CompensatedVec3 mom;
    for (int k = 0; k < field.nz(); ++k)
        for (int j = 0; j < field.ny(); ++j)
            for (int i = 0; i < field.nx(); ++i) {
                const long base = field.idx(i, j, k);
                Vec3 m{};
                for (int q = 0; q < kQ; ++q) m += field.src(q)[base] * cvec(q);
                mom.add(m);
            }
    return mom.value();
}

}  // namespace lbdem::lbm
