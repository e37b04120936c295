#include "tg/theta.hpp"

#include <cmath>
#include <numbers>

#include "tg/error.hpp"

namespace tg {
namespace {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

cd sinc(cd w) {
    if (std::abs(w) < 1e-4) {
        const cd w2 = w * w;
        return 1.0 - w2 / 6.0 + w2 * w2 / 120.0;
    }
    return std::sin(w) / w;
}

}  // namespace

Theta1Series::Theta1Series(cd tau, double max_abs_imag_v) : tau_(tau) {
    if (!(tau.imag() > 0.0)) {
        throw InvalidBasis("theta series requires Im(tau) > 0");
    }
    const double lead = -pi * tau.imag() * 0.25 + max_abs_imag_v;
    for (int n = 0; n < 400; ++n) {
        const double h = n + 0.5;
        const cd c = 2.0 * ((n % 2 == 0) ? 1.0 : -1.0) * std::exp(cd(0.0, pi) * tau * h * h);
        // log of the largest possible term magnitude for this n
        const double bound = -pi * tau.imag() * h * h + (2 * n + 1) * max_abs_imag_v;
        if (n > 0 && bound - lead < std::log(1e-17)) {
            break;
        }
        coeff_.push_back(c);
    }
}

cd Theta1Series::value(cd v) const {
    const cd e = std::exp(cd(0.0, 1.0) * v);
    const cd e2 = e * e;
    cd p = e;
    cd sum = 0.0;
    for (const cd& c : coeff_) {
        sum += c * (p - 1.0 / p);
        p *= e2;
    }
    return sum / cd(0.0, 2.0);
}

Theta1Series::Derivatives Theta1Series::derivatives(cd v) const {
    const cd e = std::exp(cd(0.0, 1.0) * v);
    const cd e2 = e * e;
    cd p = e;
    cd s = 0.0;  // sum c sin(kv)
    cd c1 = 0.0; // sum c k cos(kv)
    cd s2 = 0.0; // sum c k^2 sin(kv)
    double k = 1.0;
    for (const cd& c : coeff_) {
        const cd inv = 1.0 / p;
        const cd sn = (p - inv) / cd(0.0, 2.0);
        const cd cs = 0.5 * (p + inv);
        s += c * sn;
        c1 += c * k * cs;
        s2 += c * k * k * sn;
        p *= e2;
        k += 2.0;
    }
    return {s, c1, -s2};
}

cd Theta1Series::value_over_v(cd v) const {
    cd sum = 0.0;
    double k = 1.0;
    for (const cd& c : coeff_) {
        sum += c * k * sinc(k * v);
        k += 2.0;
    }
    return sum;
}

cd Theta1Series::derivative_at_zero() const {
    cd sum = 0.0;
    double k = 1.0;
    for (const cd& c : coeff_) {
        sum += c * k;
        k += 2.0;
    }
    return sum;
}

double log_abs_dedekind_eta(cd tau) {
    if (!(tau.imag() > 0.0)) {
        throw InvalidBasis("eta requires Im(tau) > 0");
    }
    const cd q2 = std::exp(cd(0.0, 2.0 * pi) * tau);
    double acc = -pi * tau.imag() / 12.0;
    cd qn = q2;
    for (int n = 1; n < 10000 && std::abs(qn) > 1e-18; ++n) {
        acc += std::log(std::abs(1.0 - qn));
        qn *= q2;
    }
    return acc;
}

}  // namespace tg
