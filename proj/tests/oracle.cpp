#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {
namespace {

double e1(double u) { return -std::expint(-u); }

struct Rule {
    std::vector<double> x, w;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
Rule legendre(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

template <class F>
double gauss(const Rule& r, double a, double b, F&& f) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return half * s;
}

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

}  // namespace

EwaldGreen::EwaldGreen(cplx omega1, cplx omega2) : w1_(omega1), w2_(omega2) {
    const double det = cross(w1_, w2_);
    if (!(det > 0.0)) throw std::invalid_argument("negatively oriented basis");
    area_ = det;
    t_ = area_ / (4.0 * pi);
    b1_ = {w2_.imag() / det, -w2_.real() / det};
    b2_ = {-w1_.imag() / det, w1_.real() / det};
    const double dual = std::max(std::hypot(b1_[0], b1_[1]), std::hypot(b2_[0], b2_[1]));
    const double primal = std::max(std::abs(w1_), std::abs(w2_));
    // E1(u) < 1e-18 beyond u = 38; e^{-t k^2} < 1e-18 beyond t k^2 = 42
    const double r_cut = std::sqrt(38.0 * 4.0 * t_) + 2.0 * primal;
    const double k_cut = std::sqrt(42.0 / t_);
    real_range_ = static_cast<int>(std::ceil(r_cut * dual)) + 1;
    recip_range_ = static_cast<int>(std::ceil(k_cut * primal / (2.0 * pi))) + 1;
}

double EwaldGreen::operator()(cplx x) const {
    // shift x into the cell around the origin so the real-space window is centred
    const double s = b1_[0] * x.real() + b1_[1] * x.imag();
    const double t = b2_[0] * x.real() + b2_[1] * x.imag();
    const cplx y = x - std::round(s) * w1_ - std::round(t) * w2_;
    double real_sum = 0.0;
    for (int m = -real_range_; m <= real_range_; ++m) {
        for (int n = -real_range_; n <= real_range_; ++n) {
            const double d2 = std::norm(y - static_cast<double>(m) * w1_ - static_cast<double>(n) * w2_);
            if (d2 == 0.0) return std::numeric_limits<double>::infinity();
            real_sum += e1(d2 / (4.0 * t_));
        }
    }
    double recip_sum = 0.0;
    for (int m = -recip_range_; m <= recip_range_; ++m) {
        for (int n = -recip_range_; n <= recip_range_; ++n) {
            if (m == 0 && n == 0) continue;
            const double kx = 2.0 * pi * (m * b1_[0] + n * b2_[0]);
            const double ky = 2.0 * pi * (m * b1_[1] + n * b2_[1]);
            const double k2 = kx * kx + ky * ky;
            recip_sum += std::exp(-t_ * k2) * std::cos(kx * y.real() + ky * y.imag()) / k2;
        }
    }
    return real_sum / (4.0 * pi) - t_ / area_ + recip_sum / area_;
}

double EwaldGreen::regular(cplx x) const { return (*this)(x) + std::log(std::abs(x)) / (2.0 * pi); }

double EwaldGreen::robin() const {
    std::vector<double> table;
    for (int m = 0; m < 6; ++m) table.push_back(regular(cplx(0.01 * std::ldexp(1.0, -m), 0.0)));
    // Neville-style Richardson in h^2, h halves each step
    for (std::size_t level = 1; level < table.size(); ++level) {
        const double f = std::pow(4.0, static_cast<double>(level));
        for (std::size_t i = table.size() - 1; i >= level; --i) {
            table[i] = table[i] + (table[i] - table[i - 1]) / (f - 1.0);
        }
    }
    return table.back();
}

double d_bracket(cplx q, const EwaldGreen& green, cplx w1, cplx w2, int angular, int radial) {
    const double robin = green.robin();
    const double gq = green(q);
    const auto expm1_h = [&](cplx w) { return std::expm1(8.0 * pi * (green.regular(w) - robin + gq - green(q + w))); };

    const std::array<cplx, 4> corners{(-w1 - w2) * 0.5, (w1 - w2) * 0.5, (w1 + w2) * 0.5, (-w1 + w2) * 0.5};
    struct Edge {
        double theta0, theta1, dist, normal;
    };
    std::vector<Edge> edges;
    double inradius = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        const cplx a = corners[k];
        const cplx b = corners[(k + 1) % 4];
        const cplx e = b - a;
        const double dist = cross(a, e) / std::abs(e);
        const cplx n = cplx(e.imag(), -e.real()) / std::abs(e);
        double t0 = std::arg(a);
        double t1 = std::arg(b);
        if (t1 <= t0) t1 += 2.0 * pi;
        edges.push_back({t0, t1, dist, std::arg(n)});
        inradius = std::min(inradius, dist);
    }

    const Rule rr = legendre(radial);
    // inscribed disk: the angular trapezoid averages out the harmonic quadratic exactly,
    // leaving a circle mean A r^4 + B r^6 + ... that is fitted on [0, eps] where the
    // cancellation would otherwise be lost to rounding
    const auto circle_mean = [&](double r) {
        double s = 0.0;
        for (int m = 0; m < angular; ++m) s += expm1_h(std::polar(r, 2.0 * pi * (m + 0.5) / angular));
        return s / angular;
    };
    const double eps = inradius / 32.0;
    const double m1 = circle_mean(eps) / std::pow(eps, 4);
    const double m2 = circle_mean(0.5 * eps) / std::pow(0.5 * eps, 4);
    const double b_coef = (m1 - m2) / (0.75 * eps * eps);
    const double a_coef = m1 - b_coef * eps * eps;
    double disk = 2.0 * pi * (0.5 * a_coef * eps * eps + 0.25 * b_coef * std::pow(eps, 4));
    const auto ring = [&](double r) { return 2.0 * pi * circle_mean(r) / (r * r * r); };
    for (double lo = eps; lo < inradius * (1.0 - 1e-12); lo *= 4.0) {
        disk += gauss(rr, lo, std::min(4.0 * lo, inradius), ring);
    }

    double outer = 0.0;
    double exterior = 0.0;
    for (const Edge& e : edges) {
        const auto f = [&](double a) { return 0.5 * a + 0.25 * std::sin(2.0 * a); };
        exterior += (f(e.theta1 - e.normal) - f(e.theta0 - e.normal)) / (2.0 * e.dist * e.dist);
        const int panels = 4;
        for (int p = 0; p < panels; ++p) {
            const double a = e.theta0 + (e.theta1 - e.theta0) * p / panels;
            const double b = e.theta0 + (e.theta1 - e.theta0) * (p + 1) / panels;
            outer += gauss(rr, a, b, [&](double theta) {
                const double reach = e.dist / std::cos(theta - e.normal);
                return gauss(rr, inradius, reach, [&](double r) {
                    return expm1_h(std::polar(r, theta)) / (r * r * r);
                });
            });
        }
    }
    return disk + outer - exterior;
}

std::vector<std::array<double, 4>> liouville_rk4(double c1, double c2, double a1, double a2,
                                                 const std::vector<double>& radii, double step) {
    // y = (V1, V2, r V1', r V2') as functions of s = ln r
    using State = std::array<double, 4>;
    const auto rhs = [&](double s, const State& y) {
        const double r2 = std::exp(2.0 * s);
        return State{y[2], y[3], -r2 * c2 * std::exp(y[1]), -r2 * c1 * std::exp(y[0])};
    };
    const double r0 = 1e-4;
    const double k1 = c2 * std::exp(a2);
    const double k2 = c1 * std::exp(a1);
    State y{a1 - 0.25 * k1 * r0 * r0, a2 - 0.25 * k2 * r0 * r0, -0.5 * k1 * r0 * r0, -0.5 * k2 * r0 * r0};
    double s = std::log(r0);
    std::vector<State> out;
    for (double target : radii) {
        const double s1 = std::log(target);
        const int n = std::max(1, static_cast<int>(std::ceil((s1 - s) / step)));
        const double h = (s1 - s) / n;
        for (int i = 0; i < n; ++i) {
            const State ka = rhs(s, y);
            State t;
            for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * ka[j];
            const State kb = rhs(s + 0.5 * h, t);
            for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * kb[j];
            const State kc = rhs(s + 0.5 * h, t);
            for (int j = 0; j < 4; ++j) t[j] = y[j] + h * kc[j];
            const State kd = rhs(s + h, t);
            for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (ka[j] + 2.0 * kb[j] + 2.0 * kc[j] + kd[j]);
            s += h;
        }
        out.push_back({y[0], y[1], y[2] / target, y[3] / target});
    }
    return out;
}

}  // namespace oracle
