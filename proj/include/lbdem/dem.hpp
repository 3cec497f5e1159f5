// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "lbdem/errors.hpp"
#include "lbdem/vec3.hpp"

namespace lbdem::dem {

inline constexpr double kPi = 3.14159265358979323846;

struct Particle {
    int id = -1;
    Vec3 x{};       ///< center of mass
    Vec3 u{};       ///< linear velocity
    Vec3 w{};       ///< angular velocity
    double r = 1.0;
    double m = 1.0;
    Vec3 f_old{}, f_new{};
    Vec3 t_old{}, t_new{};
    Vec3 f_hydro{}, t_hydro{};  ///< coupling force, held constant over the sub-cycles
    bool ghost = false;
    bool fixed = false;  ///< infinite inertia; mapping sees it, integration skips it

    double inertia() const { return 0.4 * m * r * r; }  // solid sphere
    double volume() const { return (4.0 / 3.0) * kPi * r * r * r; }
};

struct DemParams {
    double k_n = 0.0, d_n = 0.0;  ///< normal stiffness / damping
    double k_t = 0.0, d_t = 0.0;  ///< tangential stiffness / damping
    int subcycles = 10;           ///< DEM steps per fluid step
    Vec3 gravity{};
    double rho_p = 1.0;    ///< particle density
    double rho_f0 = 1.0;   ///< fluid reference density (buoyancy)
    double nu_fluid = 0.0; ///< kinematic viscosity for the lubrication correction
    bool lubrication = true;

    double dt_p() const { return 1.0 / subcycles; }
    /// Normal squeeze-film cutoff and gap clamp (provisional coefficients).
    static double lub_cutoff(double r_eff) { return (2.0 / 3.0) * r_eff; }
    static double lub_min_gap(double r_eff) { return 0.01 * r_eff; }

    void validate() const {
        if (k_n < 0 || d_n < 0 || k_t < 0 || d_t < 0)
            throw ConfigError("DEM stiffness/damping coefficients must be >= 0");
        if (subcycles < 1) throw ConfigError("DEM sub-cycle count must be >= 1");
    }
};

/// Accumulated tangential displacement of a persisting contact. Keyed by the
/// unordered particle pair, or (particle, wall) with negative wall ids.
struct ContactState {
    Vec3 delta_t{};
    long t_impact = 0;
    bool touched = false;
};

class ContactHistory {
public:
    using Key = std::pair<int, int>;

    ContactState& fetch(int id_a, int id_b, long now);
    const std::map<Key, ContactState>& entries() const { return entries_; }
    std::map<Key, ContactState>& entries() { return entries_; }

    void begin_cycle();       ///< clears the touched flags
    void purge_untouched();   ///< drops entries of separated pairs
    std::size_t size() const { return entries_.size(); }

    static Key make_key(int id_a, int id_b) {
        return id_a < id_b ? Key{id_a, id_b} : Key{id_b, id_a};
    }

private:
    std::map<Key, ContactState> entries_;
};

/// Static half-space the particles collide with. id is negative so wall
/// contacts share the pair-history keying.
struct WallPlane {
    int id = -1;
    Vec3 point{};
    Vec3 normal{};  ///< unit, pointing into the domain
};

struct PairForce {
    Vec3 f_i{}, t_i{};
    Vec3 f_j{}, t_j{};
};

/// Linear spring-dashpot contact between two overlapping spheres. Updates the
/// tangential history (re-projection plus incremental accumulation) before
/// evaluating the tangential spring. Newton's third law holds exactly.
PairForce contact_force(const Particle& pi, const Particle& pj, const DemParams& params,
                        ContactState& hist, double dt_p);

/// Same spring-dashpot law against a static plane of infinite mass.
PairForce wall_contact_force(const Particle& p, const WallPlane& wall, const DemParams& params,
                             ContactState& hist, double dt_p);

/// Normal squeeze-film correction for a near-contact pair (gap in
/// (0, lub_cutoff]); tangential and rotational terms are zero in this version.
PairForce lubrication_correction(const Particle& pi, const Particle& pj,
                                 const DemParams& params);
PairForce wall_lubrication_correction(const Particle& p, const WallPlane& wall,
                                      const DemParams& params);

/// Velocity Verlet, position half: x += dt u + dt^2/(2m) f_old.
void integrate_pre_force(std::vector<Particle>& particles, double dt_p);

/// Velocity Verlet, velocity half: u += dt/(2m)(f_old + f_new), angular analog;
/// then the force accumulators swap and clear.
void integrate_post_force(std::vector<Particle>& particles, double dt_p);

/// Adds buoyancy-reduced gravity (rho_p - rho_f0) V_p g to f_new of the locals.
void apply_external_forces(std::vector<Particle>& particles, const DemParams& params);

/// Uniform spatial hash over [lo, hi). Every particle must fall inside the
/// grid; an outside particle means a failed synchronization upstream.
class LinkedCellGrid {
public:
    void build(const Vec3& lo, const Vec3& hi, double cell_edge,
               const std::vector<Particle>& particles);

    /// Visits each near pair exactly once (own cell + 13 forward neighbors).
    void for_each_pair(const std::function<void(int, int)>& fn) const;

    Vec3i dims() const { return dims_; }
    double cell_edge() const { return edge_; }

private:
    Vec3 lo_{};
    Vec3i dims_{};
    double edge_ = 1.0;
    std::vector<std::vector<int>> cells_;
};

/// Cell edge covering the full interaction range (contact + lubrication
/// cutoff) with the 1% slack, so the neighbor sweep provably finds every pair.
double linked_cell_edge(double r_max, bool lubrication);

}  // namespace lbdem::dem
