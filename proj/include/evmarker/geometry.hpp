#pragma once

#include <array>
#include <cmath>

namespace evm {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Point2 o) const { return x * o.x + y * o.y; }
    double cross(Point2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct PixelCoord {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
    friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

/// Four corners, TL, TR, BR, BL unless stated otherwise.
using Quad = std::array<Point2, 4>;

/// floor(v + 0.5), the rounding used for every pixel lookup.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace evm
