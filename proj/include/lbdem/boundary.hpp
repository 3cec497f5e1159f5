// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "lbdem/field.hpp"
#include "lbdem/lbm.hpp"

namespace lbdem::lbm {

enum class BcKind { periodic, no_slip, velocity, pressure };

struct FaceBc {
    BcKind kind = BcKind::periodic;
    Vec3 u_wall{};      ///< prescribed wall velocity (velocity inflow)
    double rho = 1.0;   ///< prescribed outlet density (pressure outflow)
};

/// Face order: -x, +x, -y, +y, -z, +z.
enum Face : int { kFaceXm = 0, kFaceXp, kFaceYm, kFaceYp, kFaceZm, kFaceZp };

struct BcSpec {
    std::array<FaceBc, 6> faces{};

    bool periodic_axis(int axis) const {
        return faces[2 * axis].kind == BcKind::periodic &&
               faces[2 * axis + 1].kind == BcKind::periodic;
    }
    /// Periodicity must pair up across opposite faces.
    void validate() const;
};

/// Reconstructs the unknown incoming populations of the next pull by filling
/// the domain-face ghost slots of the source buffer:
///   no-slip    f_q(g) = f~_qbar(s)
///   velocity   f_q(g) = f~_qbar(s) + 2 w_q rho0 (c_q . u_wall) / cs^2
///   pressure   f_q(g) = -f~_qbar(s) + 2 feq_even(rho_out, u_s)
/// with s = g + c_q the adjacent interior cell. Links leaving the domain
/// through two walls at once fall back to plain bounce-back.
///
/// `touches[f]` marks the block faces that coincide with domain faces;
/// periodic faces and interior block faces are left to the halo exchange.
void apply_boundaries(PdfField& field, const BcSpec& spec,
                      const std::array<bool, 6>& touches);

/// Single-block periodic wrap: copies boundary slabs (faces, edges) of the
/// source buffer into the opposite ghost slabs for every periodic axis.
void fill_periodic_ghosts(PdfField& field, const std::array<bool, 3>& periodic);

}  // namespace lbdem::lbm
