// SPDX-License-Identifier: Apache-2.0
#include "lbdem/dem.hpp"

#include <cmath>
#include <string>

namespace lbdem::dem {

ContactState& ContactHistory::fetch(int id_a, int id_b, long now) {
    const Key key = make_key(id_a, id_b);
    auto [it, inserted] = entries_.try_emplace(key);
    if (inserted) it->second.t_impact = now;
    return it->second;
}

void ContactHistory::begin_cycle() {
    for (auto& [key, state] : entries_) state.touched = false;
}

void ContactHistory::purge_untouched() {
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (!it->second.touched)
            it = entries_.erase(it);
        else
            ++it;
    }
}

namespace {

struct ContactFrame {
    Vec3 n;        // from i toward j
    double delta_n;
    Vec3 x_cp;
};

/// Shared spring-dashpot core. u_rel is the surface velocity of i relative to
/// j at the contact point, n points from i toward j.
PairForce spring_dashpot(const ContactFrame& c, const Vec3& u_rel, const Particle& pi,
                         const Vec3& x_j, const DemParams& params, ContactState& hist,
                         double dt_p) {
    const Vec3 u_n = dot(u_rel, c.n) * c.n;
    const Vec3 u_t = u_rel - u_n;

    // Re-project the stored tangential displacement onto the current tangent
    // plane, then accumulate this sub-cycle's slip.
    Vec3 dt_vec = hist.delta_t - dot(hist.delta_t, c.n) * c.n;
    dt_vec += u_t * dt_p;
    hist.delta_t = dt_vec;
    hist.touched = true;

    const Vec3 f_n = -params.k_n * c.delta_n * c.n - params.d_n * u_n;
    const Vec3 f_t = -params.k_t * dt_vec - params.d_t * u_t;

    PairForce out;
    out.f_i = f_n + f_t;
    out.t_i = cross(c.x_cp - pi.x, f_t);
    out.f_j = -out.f_i;
    out.t_j = cross(c.x_cp - x_j, -f_t);
    return out;
}

}  // namespace

PairForce contact_force(const Particle& pi, const Particle& pj, const DemParams& params,
                        ContactState& hist, double dt_p) {
    const Vec3 d = pj.x - pi.x;
    const double dist = norm(d);
    if (dist <= 0.0)
        throw NumericError("degenerate contact: coincident particle centers (ids " +
                           std::to_string(pi.id) + ", " + std::to_string(pj.id) + ")");
    ContactFrame c;
    c.n = d / dist;
    c.delta_n = pi.r + pj.r - dist;
    c.x_cp = pi.x + (pi.r - 0.5 * c.delta_n) * c.n;  // surface midpoint on the center line

    const Vec3 u_rel = (pi.u + cross(pi.w, c.x_cp - pi.x)) - (pj.u + cross(pj.w, c.x_cp - pj.x));
    return spring_dashpot(c, u_rel, pi, pj.x, params, hist, dt_p);
}

PairForce wall_contact_force(const Particle& p, const WallPlane& wall, const DemParams& params,
                             ContactState& hist, double dt_p) {
    const double d = dot(p.x - wall.point, wall.normal);  // center height above plane
    ContactFrame c;
    c.n = -wall.normal;  // "toward the partner"
    c.delta_n = p.r - d;
    c.x_cp = p.x + (p.r - 0.5 * c.delta_n) * c.n;

    const Vec3 u_rel = p.u + cross(p.w, c.x_cp - p.x);
    // The wall is an infinite-mass, zero-velocity partner; reaction terms of
    // the returned PairForce are unused.
    return spring_dashpot(c, u_rel, p, wall.point, params, hist, dt_p);
}

namespace {

PairForce squeeze_film(const Vec3& n, double gap, double r_eff, const Vec3& u_rel,
                       const DemParams& params) {
    PairForce out;
    if (gap <= 0.0 || gap > DemParams::lub_cutoff(r_eff)) return out;
    const double s = std::max(gap, DemParams::lub_min_gap(r_eff));
    const double mu = params.rho_f0 * params.nu_fluid;
    const Vec3 f = -6.0 * kPi * mu * r_eff * r_eff / s * dot(u_rel, n) * n;
    out.f_i = f;
    out.f_j = -f;
    return out;
}

}  // namespace

PairForce lubrication_correction(const Particle& pi, const Particle& pj,
                                 const DemParams& params) {
    const Vec3 d = pj.x - pi.x;
    const double dist = norm(d);
    const double gap = dist - pi.r - pj.r;
    const double r_eff = pi.r * pj.r / (pi.r + pj.r);
    return squeeze_film(d / dist, gap, r_eff, pi.u - pj.u, params);
}

PairForce wall_lubrication_correction(const Particle& p, const WallPlane& wall,
                                      const DemParams& params) {
    const double d = dot(p.x - wall.point, wall.normal);
    const double gap = d - p.r;
    return squeeze_film(-wall.normal, gap, p.r, p.u, params);
}

void integrate_pre_force(std::vector<Particle>& particles, double dt_p) {
    for (Particle& p : particles) {
        if (p.ghost || p.fixed) continue;
        p.x += dt_p * p.u + (dt_p * dt_p / (2.0 * p.m)) * p.f_old;
    }
}

void integrate_post_force(std::vector<Particle>& particles, double dt_p) {
    for (Particle& p : particles) {
        if (p.ghost) continue;
        if (!p.fixed) {
            p.u += (dt_p / (2.0 * p.m)) * (p.f_old + p.f_new);
            p.w += (dt_p / (2.0 * p.inertia())) * (p.t_old + p.t_new);
        }
        p.f_old = p.f_new;
        p.t_old = p.t_new;
        p.f_new = Vec3{};
        p.t_new = Vec3{};
    }
}

void apply_external_forces(std::vector<Particle>& particles, const DemParams& params) {
    const double drho = params.rho_p - params.rho_f0;
    for (Particle& p : particles) {
        if (p.ghost || p.fixed) continue;
        p.f_new += drho * p.volume() * params.gravity;
    }
}

double linked_cell_edge(double r_max, bool lubrication) {
    const double cutoff = lubrication ? DemParams::lub_cutoff(0.5 * r_max) : 0.0;
    return 1.01 * (2.0 * r_max + cutoff);
}

void LinkedCellGrid::build(const Vec3& lo, const Vec3& hi, double cell_edge,
                           const std::vector<Particle>& particles) {
    lo_ = lo;
    edge_ = cell_edge;
    for (int a = 0; a < 3; ++a)
        dims_[a] = std::max(1, static_cast<int>(std::ceil((hi[a] - lo[a]) / cell_edge)));

    cells_.assign(static_cast<std::size_t>(dims_.x) * dims_.y * dims_.z, {});
    for (auto& c : cells_) c.clear();

    for (std::size_t n = 0; n < particles.size(); ++n) {
        const Vec3& x = particles[n].x;
        Vec3i c;
        for (int a = 0; a < 3; ++a) {
            c[a] = static_cast<int>(std::floor((x[a] - lo_[a]) / edge_));
            if (c[a] < 0 || c[a] >= dims_[a])
                throw SyncError("particle id " + std::to_string(particles[n].id) +
                                " outside the linked-cell grid (failed synchronization?)");
        }
        cells_[(static_cast<std::size_t>(c.z) * dims_.y + c.y) * dims_.x + c.x].push_back(
            static_cast<int>(n));
    }
}

void LinkedCellGrid::for_each_pair(const std::function<void(int, int)>& fn) const {
    // Forward half-neighborhood: strictly lexicographically positive offsets.
    static constexpr Vec3i kHalf[13] = {
        {1, 0, 0},  {-1, 1, 0}, {0, 1, 0},  {1, 1, 0},  {-1, -1, 1}, {0, -1, 1}, {1, -1, 1},
        {-1, 0, 1}, {0, 0, 1},  {1, 0, 1},  {-1, 1, 1}, {0, 1, 1},   {1, 1, 1}};

    auto cell_at = [&](int i, int j, int k) -> const std::vector<int>& {
        return cells_[(static_cast<std::size_t>(k) * dims_.y + j) * dims_.x + i];
    };

    for (int k = 0; k < dims_.z; ++k)
        for (int j = 0; j < dims_.y; ++j)
            for (int i = 0; i < dims_.x; ++i) {
                const auto& own = cell_at(i, j, k);
                for (std::size_t a = 0; a < own.size(); ++a)
                    for (std::size_t b = a + 1; b < own.size(); ++b) fn(own[a], own[b]);
                for (const Vec3i& off : kHalf) {
                    const int ni = i + off.x, nj = j + off.y, nk = k + off.z;
                    if (ni < 0 || ni >= dims_.x || nj < 0 || nj >= dims_.y || nk < 0 ||
                        nk >= dims_.z)
                        continue;
                    const auto& other = cell_at(ni, nj, nk);
                    for (int a : own)
                        for (int b : other) fn(a, b);
                }
            }
}

}  // namespace lbdem::dem
