#pragma once

#include <array>
#include <complex>

namespace tg {

using cplx = std::complex<double>;

/// The two periods of a flat torus C / (Z omega1 + Z omega2).
///
/// Construction validates orientation (Im(omega2/omega1) > 0). Alongside the
/// user basis the class keeps a Lagrange-reduced basis of the same lattice;
/// it is used internally for nearest-image searches and series evaluation,
/// where a short, nearly orthogonal basis gives the fastest convergence.
class LatticeBasis {
public:
    LatticeBasis(cplx omega1, cplx omega2);

    cplx omega1() const { return omega1_; }
    cplx omega2() const { return omega2_; }
    cplx omega3() const { return omega1_ + omega2_; }
    cplx tau() const { return omega2_ / omega1_; }

    double area() const { return area_; }
    double max_period() const;
    double min_period() const;

    /// Coordinates (s, t) with z = s*omega1 + t*omega2.
    std::array<double, 2> to_fractional(cplx z) const;
    cplx from_fractional(double s, double t) const { return s * omega1_ + t * omega2_; }

    /// Reduced basis: |r1| <= |r2|, |Re(r2/r1)| <= 1/2, Im(r2/r1) > 0.
    cplx reduced1() const { return reduced1_; }
    cplx reduced2() const { return reduced2_; }
    cplx reduced_tau() const { return reduced2_ / reduced1_; }
    std::array<double, 2> to_reduced_fractional(cplx z) const;

    /// Tolerance used for point equality on this torus.
    double point_tolerance() const { return 1e-10 * max_period(); }

    bool operator==(const LatticeBasis& other) const = default;

private:
    cplx omega1_;
    cplx omega2_;
    double area_;
    // inverse of [[Re w1, Re w2], [Im w1, Im w2]]
    std::array<double, 4> inverse_;
    cplx reduced1_;
    cplx reduced2_;
    std::array<double, 4> reduced_inverse_;
};

/// A point of the torus, stored as its representative in [0,1)omega1 + [0,1)omega2.
struct TorusPoint {
    cplx z;
};

TorusPoint reduce_to_fundamental(cplx z, const LatticeBasis& basis);

/// Representative of z modulo the lattice with the smallest modulus.
cplx nearest_image(cplx z, const LatticeBasis& basis);

double torus_distance(const TorusPoint& x, const TorusPoint& y, const LatticeBasis& basis);
double torus_distance(cplx x, cplx y, const LatticeBasis& basis);

/// Equality modulo the lattice within basis.point_tolerance().
bool same_point(cplx x, cplx y, const LatticeBasis& basis);

/// omega1/2, omega2/2, (omega1+omega2)/2, reduced.
std::array<TorusPoint, 3> half_periods(const LatticeBasis& basis);

/// omega1/4, omega2/4, (omega1+omega2)/4, reduced.
std::array<TorusPoint, 3> four_torsion(const LatticeBasis& basis);

}  // namespace tg
