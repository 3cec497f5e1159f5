// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "lbdem/vec3.hpp"

namespace lbdem::lbm {

// D3Q19 lattice model. Directions are laid out as the rest population
// followed by opposite pairs, so opposite(q) is a constant-time flip.
//
// The weights satisfy (exactly, in rational arithmetic over /36):
//   sum_q w_q = 1,  sum_q w_q c_q = 0,  sum_q w_q c_qa c_qb = (1/3) delta_ab.

inline constexpr int kQ = 19;

inline constexpr std::array<Vec3i, kQ> kC = {{
    {0, 0, 0},
    {1, 0, 0},  {-1, 0, 0},
    {0, 1, 0},  {0, -1, 0},
    {0, 0, 1},  {0, 0, -1},
    {1, 1, 0},  {-1, -1, 0},
    {1, -1, 0}, {-1, 1, 0},
    {1, 0, 1},  {-1, 0, -1},
    {1, 0, -1}, {-1, 0, 1},
    {0, 1, 1},  {0, -1, -1},
    {0, 1, -1}, {0, -1, 1},
}};

/// Weight numerators over the common denominator 36.
inline constexpr std::array<int, kQ> kWeightNum36 = {
    12, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};

inline constexpr std::array<double, kQ> kW = [] {
    std::array<double, kQ> w{};
    for (int q = 0; q < kQ; ++q) w[q] = kWeightNum36[q] / 36.0;
    return w;
}();

inline constexpr double kCs2 = 1.0 / 3.0;
inline constexpr double kInvCs2 = 3.0;
inline constexpr double kInvCs4 = 9.0;

/// Index of the opposite direction, c_qbar = -c_q.
constexpr int opposite(int q) { return q == 0 ? 0 : (((q - 1) ^ 1) + 1); }

constexpr Vec3 cvec(int q) {
    return {static_cast<double>(kC[q].x), static_cast<double>(kC[q].y),
            static_cast<double>(kC[q].z)};
}

}  // namespace lbdem::lbm
