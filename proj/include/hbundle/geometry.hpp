#ifndef HBUNDLE_GEOMETRY_HPP
#define HBUNDLE_GEOMETRY_HPP

#include <cmath>

namespace hbundle {

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }

// Counter-clockwise perpendicular in a y-up frame: (dx, dy) -> (-dy, dx).
inline constexpr Vec2 left_normal(Vec2 d) { return {-d.y, d.x}; }

inline constexpr Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }

inline double distance_to_segment(Vec2 p, Vec2 a, Vec2 b, double* param = nullptr)
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    if (param)
        *param = t;
    return distance(p, a + ab * t);
}

} // namespace hbundle

#endif // HBUNDLE_GEOMETRY_HPP
