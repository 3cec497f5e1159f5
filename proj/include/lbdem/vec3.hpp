// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <ostream>

namespace lbdem {

/// Cartesian 3-vector of doubles. Value type, used for positions,
/// velocities, forces and torques alike.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    constexpr Vec3& operator/=(double s) { x /= s; y /= s; z /= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a /= s; }

    friend constexpr bool operator==(const Vec3& a, const Vec3& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << v.x << ' ' << v.y << ' ' << v.z;
}

/// Integer triple for lattice offsets, block grids and cell coordinates.
struct Vec3i {
    int x = 0, y = 0, z = 0;

    constexpr int& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr int operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3i operator+(const Vec3i& a, const Vec3i& b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr Vec3i operator-(const Vec3i& a, const Vec3i& b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr bool operator==(const Vec3i& a, const Vec3i& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

/// Neumaier-compensated accumulator. Used wherever long sums feed tight
/// tolerances (hydrodynamic force reduction, momentum audits), so the
/// result is insensitive to how the terms are grouped across blocks.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    void add(const CompensatedSum& o) {
        add(o.sum);
        comp += o.comp;
    }
    double value() const { return sum + comp; }
};

struct CompensatedVec3 {
    CompensatedSum x, y, z;
    void add(const Vec3& v) { x.add(v.x); y.add(v.y); z.add(v.z); }
    void add(const CompensatedVec3& o) { x.add(o.x); y.add(o.y); z.add(o.z); }
    Vec3 value() const { return {x.value(), y.value(), z.value()}; }
};

}  // namespace lbdem
