#include "tg/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tg/error.hpp"

namespace tg {
namespace {

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

std::array<double, 4> invert(cplx a, cplx b) {
    const double det = cross(a, b);
    return {b.imag() / det, -b.real() / det, -a.imag() / det, a.real() / det};
}

std::array<double, 2> apply(const std::array<double, 4>& m, cplx z) {
    return {m[0] * z.real() + m[1] * z.imag(), m[2] * z.real() + m[3] * z.imag()};
}

// Snap to [0,1); values within 1e-13 of an integer go to 0.
double wrap_unit(double s) {
    s -= std::floor(s);
    if (s > 1.0 - 1e-13 || s < 1e-13) {
        return 0.0;
    }
    return s;
}

}  // namespace

LatticeBasis::LatticeBasis(cplx omega1, cplx omega2) : omega1_(omega1), omega2_(omega2) {
    if (!std::isfinite(omega1.real()) || !std::isfinite(omega1.imag()) ||
        !std::isfinite(omega2.real()) || !std::isfinite(omega2.imag()) || std::abs(omega1) == 0.0) {
        throw InvalidBasis("lattice basis must have finite, nonzero periods");
    }
    const double orient = (omega2 / omega1).imag();
    if (!(orient > 0.0)) {
        std::ostringstream msg;
        msg << "degenerate or negatively oriented basis: Im(omega2/omega1) = " << orient;
        throw InvalidBasis(msg.str());
    }
    area_ = std::abs(cross(omega1, omega2));
    inverse_ = invert(omega1, omega2);

    // Lagrange-Gauss reduction.
    cplx u = omega1;
    cplx v = omega2;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::norm(u) > std::norm(v)) {
            std::swap(u, v);
        }
        const double m = std::round((std::conj(u) * v).real() / std::norm(u));
        if (m == 0.0) {
            break;
        }
        v -= m * u;
    }
    if (std::norm(u) > std::norm(v)) {
        std::swap(u, v);
    }
    if ((v / u).imag() < 0.0) {
        v = -v;
    }
    reduced1_ = u;
    reduced2_ = v;
    reduced_inverse_ = invert(u, v);
}

double LatticeBasis::max_period() const { return std::max(std::abs(omega1_), std::abs(omega2_)); }

double LatticeBasis::min_period() const { return std::min(std::abs(omega1_), std::abs(omega2_)); }

std::array<double, 2> LatticeBasis::to_fractional(cplx z) const { return apply(inverse_, z); }

std::array<double, 2> LatticeBasis::to_reduced_fractional(cplx z) const {
    return apply(reduced_inverse_, z);
}

TorusPoint reduce_to_fundamental(cplx z, const LatticeBasis& basis) {
    const auto [s, t] = basis.to_fractional(z);
    return TorusPoint{basis.from_fractional(wrap_unit(s), wrap_unit(t))};
}

cplx nearest_image(cplx z, const LatticeBasis& basis) {
    const cplx u = basis.reduced1();
    const cplx v = basis.reduced2();
    auto [s, t] = basis.to_reduced_fractional(z);
    const cplx centered = z - std::round(s) * u - std::round(t) * v;
    cplx best = centered;
    double best_norm = std::norm(centered);
    for (int m = -1; m <= 1; ++m) {
        for (int n = -1; n <= 1; ++n) {
            const cplx cand = centered - static_cast<double>(m) * u - static_cast<double>(n) * v;
            const double nc = std::norm(cand);
            if (nc < best_norm) {
                best_norm = nc;
                best = cand;
            }
        }
    }
    return best;
}

double torus_distance(cplx x, cplx y, const LatticeBasis& basis) {
    return std::abs(nearest_image(x - y, basis));
}

double torus_distance(const TorusPoint& x, const TorusPoint& y, const LatticeBasis& basis) {
    return torus_distance(x.z, y.z, basis);
}

bool same_point(cplx x, cplx y, const LatticeBasis& basis) {
    return torus_distance(x, y, basis) < basis.point_tolerance();
}

std::array<TorusPoint, 3> half_periods(const LatticeBasis& basis) {
    return {reduce_to_fundamental(0.5 * basis.omega1(), basis),
            reduce_to_fundamental(0.5 * basis.omega2(), basis),
            reduce_to_fundamental(0.5 * basis.omega3(), basis)};
}

std::array<TorusPoint, 3> four_torsion(const LatticeBasis& basis) {
    return {reduce_to_fundamental(0.25 * basis.omega1(), basis),
            reduce_to_fundamental(0.25 * basis.omega2(), basis),
            reduce_to_fundamental(0.25 * basis.omega3(), basis)};
}

}  // namespace tg
