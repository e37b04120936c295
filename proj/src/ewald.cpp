#include "tg/ewald.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <numbers>

#include "tg/error.hpp"

namespace tg {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double cutoff_exponent = 50.0;

// All m*u + n*v with |m*u + n*v| <= radius; u, v a reduced basis.
std::vector<cplx> lattice_disc(cplx u, cplx v, double radius) {
    // For a reduced basis |m u + n v|^2 >= (m^2 |u|^2 + n^2 |v|^2) / 2.
    const int mmax = static_cast<int>(std::ceil(radius * std::sqrt(2.0) / std::abs(u))) + 1;
    const int nmax = static_cast<int>(std::ceil(radius * std::sqrt(2.0) / std::abs(v))) + 1;
    std::vector<cplx> out;
    for (int m = -mmax; m <= mmax; ++m) {
        for (int n = -nmax; n <= nmax; ++n) {
            const cplx p = static_cast<double>(m) * u + static_cast<double>(n) * v;
            if (std::abs(p) <= radius) {
                out.push_back(p);
            }
        }
    }
    return out;
}

}  // namespace

EwaldSum::EwaldSum(const LatticeBasis& basis) : basis_(basis) {
    const double area = basis.area();
    alpha2_ = pi / area;
    background_ = 1.0 / (4.0 * alpha2_ * area);

    const cplx u = basis.reduced1();
    const cplx v = basis.reduced2();
    // nearest images have |r| below the covering radius, bounded by (|u|+|v|)/2
    const double cover = 0.5 * (std::abs(u) + std::abs(v));
    real_ = lattice_disc(u, v, std::sqrt(cutoff_exponent / alpha2_) + cover);

    // dual basis: k . lambda integer
    const double det = u.real() * v.imag() - u.imag() * v.real();
    const cplx du(v.imag() / det, -v.real() / det);
    const cplx dv(-u.imag() / det, u.real() / det);
    const double kmax = std::sqrt(cutoff_exponent / (pi * area));
    for (const cplx& k : lattice_disc(du, dv, kmax)) {
        const double k2 = std::norm(k);
        if (k2 == 0.0) {
            continue;
        }
        const double w = std::exp(-pi * area * k2) / (4.0 * pi * pi * k2 * area);
        recip_.push_back({k.real(), k.imag(), w});
    }
}

double EwaldSum::value(cplx z) const {
    const cplx r = nearest_image(z, basis_);
    double real_sum = 0.0;
    for (const cplx& lam : real_) {
        const double x = alpha2_ * std::norm(r - lam);
        if (x == 0.0) {
            throw SingularityError("Ewald sum evaluated at a lattice point");
        }
        if (x < cutoff_exponent) {
            real_sum += boost::math::expint(1, x);
        }
    }
    double recip_sum = 0.0;
    for (const Mode& m : recip_) {
        recip_sum += m.weight * std::cos(2.0 * pi * (m.kx * r.real() + m.ky * r.imag()));
    }
    return real_sum / (4.0 * pi) - background_ + recip_sum;
}

}  // namespace tg
