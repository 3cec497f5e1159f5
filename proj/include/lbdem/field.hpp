// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "lbdem/lattice.hpp"
#include "lbdem/vec3.hpp"

namespace lbdem {

/// Half-open box of cell coordinates [lo, hi).
struct CellBox {
    Vec3i lo;
    Vec3i hi;

    bool empty() const { return hi.x <= lo.x || hi.y <= lo.y || hi.z <= lo.z; }
    long volume() const {
        if (empty()) return 0;
        return static_cast<long>(hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
    }
    bool contains(const Vec3i& c) const {
        return c.x >= lo.x && c.x < hi.x && c.y >= lo.y && c.y < hi.y && c.z >= lo.z &&
               c.z < hi.z;
    }
};

/// Splits the 1-cell-wide boundary shell of [0,n) into at most 6 disjoint
/// boxes (used to run the outer kernel after the halo arrives).
std::vector<CellBox> boundary_shell(const Vec3i& dims, int width = 1);

/// Double-buffered D3Q19 population field with a one-cell ghost layer.
/// Storage is structure-of-arrays per direction; buffers hold post-collision
/// populations and the swap after the outer kernel is the only ownership
/// transfer per step.
class PdfField {
public:
    PdfField(int nx, int ny, int nz);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    long cells() const { return static_cast<long>(nx_) * ny_ * nz_; }
    long alloc_cells() const { return alloc_; }

    /// Linear index of cell (i,j,k); ghosts live at coordinates -1 and n.
    long idx(int i, int j, int k) const {
        return (static_cast<long>(k + 1) * ay_ + (j + 1)) * ax_ + (i + 1);
    }
    /// Index shift corresponding to moving one cell along c_q.
    long shift(int q) const {
        return lbm::kC[q].x + static_cast<long>(lbm::kC[q].y) * ax_ +
               static_cast<long>(lbm::kC[q].z) * ax_ * ay_;
    }

    double* src(int q) { return src_->data() + q * alloc_; }
    const double* src(int q) const { return src_->data() + q * alloc_; }
    double* dst(int q) { return dst_->data() + q * alloc_; }

    double& at_src(int q, int i, int j, int k) { return src(q)[idx(i, j, k)]; }
    double at_src(int q, int i, int j, int k) const { return src(q)[idx(i, j, k)]; }
    double& at_dst(int q, int i, int j, int k) { return dst(q)[idx(i, j, k)]; }

    void swap() { std::swap(src_, dst_); }

    /// Sets every interior cell of the source buffer to the given populations.
    void fill_src(const std::array<double, lbm::kQ>& f);
    /// Writes v into all ghost slots of the source buffer (poisoning tests).
    void fill_ghosts_src(double v);

private:
    int nx_, ny_, nz_;
    int ax_, ay_, az_;  // allocated extents (interior + 2 ghost cells)
    long alloc_;
    std::vector<double> buf_a_, buf_b_;
    std::vector<double>* src_;
    std::vector<double>* dst_;
};

/// Per-cell solid-fraction data: up to two (particle id, B_i) entries plus
/// the clamped total B. Interior cells only, lexicographic layout.
struct FractionField {
    int nx = 0, ny = 0, nz = 0;
    std::vector<std::uint8_t> count;
    std::vector<int> id0, id1;
    std::vector<double> b0, b1;
    std::vector<double> btot;

    FractionField() = default;
    FractionField(int nx_, int ny_, int nz_) { resize(nx_, ny_, nz_); }

    void resize(int nx_, int ny_, int nz_);
    void clear();
    long cells() const { return static_cast<long>(nx) * ny * nz; }
    long idx(int i, int j, int k) const {
        return (static_cast<long>(k) * ny + j) * nx + i;
    }
};

/// Particle velocity evaluated at the cell center, one slot per fraction entry.
struct SolidVelocityField {
    std::vector<Vec3> v0, v1;
    void resize(long cells) {
        v0.assign(cells, Vec3{});
        v1.assign(cells, Vec3{});
    }
};

/// Per-cell momentum transferred to each overlapping particle by the solid
/// collision operator. Reduced to per-particle forces after the kernels ran,
/// in lexicographic cell order, so the sums are decomposition independent.
struct CellMomentumScratch {
    std::vector<Vec3> m0, m1;
    void resize(long cells) {
        m0.assign(cells, Vec3{});
        m1.assign(cells, Vec3{});
    }
};

}  // namespace lbdem
