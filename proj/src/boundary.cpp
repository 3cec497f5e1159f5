// SPDX-License-Identifier: Apache-2.0
#include "lbdem/boundary.hpp"

#include "lbdem/errors.hpp"

namespace lbdem::lbm {

void BcSpec::validate() const {
    for (int axis = 0; axis < 3; ++axis) {
        const bool lo = faces[2 * axis].kind == BcKind::periodic;
        const bool hi = faces[2 * axis + 1].kind == BcKind::periodic;
        if (lo != hi)
            throw ConfigError("periodic boundary must be assigned to both faces of axis " +
                              std::to_string(axis));
    }
}

namespace {

inline bool interior(const PdfField& f, const Vec3i& c) {
    return c.x >= 0 && c.x < f.nx() && c.y >= 0 && c.y < f.ny() && c.z >= 0 && c.z < f.nz();
}

/// Bare velocity moment of the source-buffer populations at cell s.
inline Vec3 cell_velocity(const PdfField& f, const Vec3i& s) {
    const long base = f.idx(s.x, s.y, s.z);
    Vec3 mom{};
    for (int q = 0; q < kQ; ++q) mom += f.src(q)[base] * cvec(q);
    return mom / kRho0;
}

void fill_face(PdfField& field, const BcSpec& spec, const std::array<bool, 6>& touches,
               int face) {
    const int axis = face / 2;
    const int side = face % 2;  // 0 = low, 1 = high
    const FaceBc& bc = spec.faces[face];

    const Vec3i dims{field.nx(), field.ny(), field.nz()};
    Vec3i g;
    const int ga = side == 0 ? -1 : dims[axis];

    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    for (int jb = -1; jb <= dims[b]; ++jb)
        for (int jc = -1; jc <= dims[c]; ++jc) {
            g[axis] = ga;
            g[b] = jb;
            g[c] = jc;
            for (int q = 1; q < kQ; ++q) {
                const Vec3i s = g + kC[q];
                if (!interior(field, s)) continue;

                // Does this link also leave the domain through another wall?
                bool multi_wall = false;
                for (int a2 = 0; a2 < 3; ++a2) {
                    if (a2 == axis) continue;
                    if (g[a2] == -1 && touches[2 * a2] &&
                        spec.faces[2 * a2].kind != BcKind::periodic)
                        multi_wall = true;
                    if (g[a2] == dims[a2] && touches[2 * a2 + 1] &&
                        spec.faces[2 * a2 + 1].kind != BcKind::periodic)
                        multi_wall = true;
                }

                const int qb = opposite(q);
                const long gi = field.idx(g.x, g.y, g.z);
                const long si = field.idx(s.x, s.y, s.z);
                const double out = field.src(qb)[si];

                double v;
                if (multi_wall || bc.kind == BcKind::no_slip) {
                    v = out;
                } else if (bc.kind == BcKind::velocity) {
                    v = out + 2.0 * kW[q] * kRho0 * dot(cvec(q), bc.u_wall) * kInvCs2;
                } else {  // pressure, anti-bounce-back with extrapolated velocity
                    const Vec3 ub = cell_velocity(field, s);
                    const double cu = dot(cvec(q), ub);
                    const double feq_even =
                        kW[q] * (bc.rho + kRho0 * (0.5 * cu * cu * kInvCs4 -
                                                   0.5 * dot(ub, ub) * kInvCs2));
                    v = -out + 2.0 * feq_even;
                }
                field.src(q)[gi] = v;
            }
        }
}

}  // namespace

void apply_boundaries(PdfField& field, const BcSpec& spec, const std::array<bool, 6>& touches) {
    for (int face = 0; face < 6; ++face) {
        if (!touches[face]) continue;
        if (spec.faces[face].kind == BcKind::periodic) continue;
        fill_face(field, spec, touches, face);
    }
}

void fill_periodic_ghosts(PdfField& field, const std::array<bool, 3>& periodic) {
    const Vec3i dims{field.nx(), field.ny(), field.nz()};
    // All 26 ghost regions whose nonzero offset axes are all periodic.
    for (int ox = -1; ox <= 1; ++ox)
        for (int oy = -1; oy <= 1; ++oy)
            for (int oz = -1; oz <= 1; ++oz) {
                const Vec3i off{ox, oy, oz};
                if (off == Vec3i{0, 0, 0}) continue;
                bool ok = true;
                for (int a = 0; a < 3; ++a)
                    if (off[a] != 0 && !periodic[a]) ok = false;
                if (!ok) continue;

                // Ghost region in direction off; source is the wrapped slab.
                Vec3i lo, hi;
                for (int a = 0; a < 3; ++a) {
                    if (off[a] == -1) {
                        lo[a] = -1;
                        hi[a] = 0;
                    } else if (off[a] == 1) {
                        lo[a] = dims[a];
                        hi[a] = dims[a] + 1;
                    } else {
                        lo[a] = 0;
                        hi[a] = dims[a];
                    }
                }
                for (int q = 0; q < kQ; ++q) {
                    double* p = field.src(q);
                    for (int k = lo.z; k < hi.z; ++k)
                        for (int j = lo.y; j < hi.y; ++j)
                            for (int i = lo.x; i < hi.x; ++i) {
                                const int si = off.x == 0 ? i : (off.x == 1 ? 0 : dims.x - 1);
                                const int sj = off.y == 0 ? j : (off.y == 1 ? 0 : dims.y - 1);
                                const int sk = off.z == 0 ? k : (off.z == 1 ? 0 : dims.z - 1);
                                p[field.idx(i, j, k)] = p[field.idx(si, sj, sk)];
                            }
                }
            }
}

}  // namespace lbdem::lbm
