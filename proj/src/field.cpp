// SPDX-License-Identifier: Apache-2.0
#include "lbdem/field.hpp"

namespace lbdem {

PdfField::PdfField(int nx, int ny, int nz)
    : nx_(nx), ny_(ny), nz_(nz), ax_(nx + 2), ay_(ny + 2), az_(nz + 2) {
    alloc_ = static_cast<long>(ax_) * ay_ * az_;
    buf_a_.assign(static_cast<std::size_t>(alloc_) * lbm::kQ, 0.0);
    buf_b_.assign(static_cast<std::size_t>(alloc_) * lbm::kQ, 0.0);
    src_ = &buf_a_;
    dst_ = &buf_b_;
}

void PdfField::fill_src(const std::array<double, lbm::kQ>& f) {
    for (int q = 0; q < lbm::kQ; ++q) {
        double* p = src(q);
        for (int k = 0; k < nz_; ++k)
            for (int j = 0; j < ny_; ++j)
                for (int i = 0; i < nx_; ++i) p[idx(i, j, k)] = f[q];
    }
}

void PdfField::fill_ghosts_src(double v) {
    for (int q = 0; q < lbm::kQ; ++q) {
        double* p = src(q);
        for (int k = -1; k <= nz_; ++k)
            for (int j = -1; j <= ny_; ++j)
                for (int i = -1; i <= nx_; ++i) {
                    const bool interior =
                        i >= 0 && i < nx_ && j >= 0 && j < ny_ && k >= 0 && k < nz_;
                    if (!interior) p[idx(i, j, k)] = v;
                }
    }
}

void FractionField::resize(int nx_, int ny_, int nz_) {
    nx = nx_;
    ny = ny_;
    nz = nz_;
    const long n = cells();
    count.assign(n, 0);
    id0.assign(n, -1);
    id1.assign(n, -1);
    b0.assign(n, 0.0);
    b1.assign(n, 0.0);
    btot.assign(n, 0.0);
}

void FractionField::clear() {
    std::fill(count.begin(), count.end(), 0);
    std::fill(btot.begin(), btot.end(), 0.0);
}

std::vector<CellBox> boundary_shell(const Vec3i& dims, int width) {
    std::vector<CellBox> boxes;
    const int w = width;
    if (dims.x <= 2 * w || dims.y <= 2 * w || dims.z <= 2 * w) {
        // Degenerate: everything is shell.
        boxes.push_back({{0, 0, 0}, dims});
        return boxes;
    }
    // z slabs over the full xy extent, then y slabs shrunk in z, then x slabs
    // shrunk in both, which tiles the shell without overlap.
    boxes.push_back({{0, 0, 0}, {dims.x, dims.y, w}});
    boxes.push_back({{0, 0, dims.z - w}, {dims.x, dims.y, dims.z}});
    boxes.push_back({{0, 0, w}, {dims.x, w, dims.z - w}});
    boxes.push_back({{0, dims.y - w, w}, {dims.x, dims.y, dims.z - w}});
    boxes.push_back({{0, w, w}, {w, dims.y - w, dims.z - w}});
    boxes.push_back({{dims.x - w, w, w}, {dims.x, dims.y - w, dims.z - w}});
    return boxes;
}

}  // namespace lbdem
