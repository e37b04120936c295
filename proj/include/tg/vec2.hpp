#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace tg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }

    double norm() const { return std::hypot(x, y); }
    std::complex<double> as_complex() const { return {x, y}; }
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    Sym2& operator+=(const Sym2& o) {
        xx += o.xx;
        xy += o.xy;
        yy += o.yy;
        return *this;
    }
    friend Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
    friend Sym2 operator*(double s, const Sym2& a) { return {s * a.xx, s * a.xy, s * a.yy}; }

    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * xy; }

    /// Eigenvalues in ascending order.
    std::array<double, 2> eigenvalues() const {
        const double mean = 0.5 * (xx + yy);
        const double rad = std::hypot(0.5 * (xx - yy), xy);
        return {mean - rad, mean + rad};
    }
};

}  // namespace tg
