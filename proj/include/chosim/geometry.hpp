#pragma once

#include <cmath>

namespace chosim {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap an angle to (-180, 180].
inline double wrap_deg(double a) {
    a = std::fmod(a, 360.0);
    if (a > 180.0) a -= 360.0;
    if (a <= -180.0) a += 360.0;
    return a;
}

// Azimuth of the vector from `from` to `to`, degrees CCW from +x.
inline double azimuth_deg(Vec2 from, Vec2 to) {
    return rad2deg(std::atan2(to.y - from.y, to.x - from.x));
}

inline Vec2 unit_from_azimuth(double az_deg) {
    const double r = deg2rad(az_deg);
    return {std::cos(r), std::sin(r)};
}

// Regular hexagon centered at the origin with one vertex at azimuth 0.
// Edge normals then sit at 30, 90, ..., 330 degrees.
struct Hexagon {
    double circumradius = 0.0;

    double apothem() const { return circumradius * std::sqrt(3.0) / 2.0; }

    bool contains(Vec2 p) const {
        const double a = apothem();
        for (int k = 0; k < 6; ++k) {
            const Vec2 n = unit_from_azimuth(30.0 + 60.0 * k);
            if (p.x * n.x + p.y * n.y > a) return false;
        }
        return true;
    }
};

} // namespace chosim
