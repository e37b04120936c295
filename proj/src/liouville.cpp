#include "tg/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "tg/error.hpp"

namespace tg {
namespace {

namespace odeint = boost::numeric::odeint;

constexpr double two_pi = 2.0 * std::numbers::pi;

// V1, V2, r V1', r V2', mass1, mass2
using State = std::array<double, 6>;

struct Coefficients {
    double c1, c2, a1, a2;
};

void check_inputs(const Coefficients& k, const ShootOptions& o) {
    if (!(k.c1 > 0.0) || !(k.c2 > 0.0) || !std::isfinite(k.c1) || !std::isfinite(k.c2)) {
        throw ConfigError("Liouville coefficients c1, c2 must be positive");
    }
    if (!std::isfinite(k.a1) || !std::isfinite(k.a2)) {
        throw ConfigError("Liouville initial values a1, a2 must be finite");
    }
    if (!(o.r_max >= 1.0) || !(o.rel_tol > 0.0) || !(o.abs_tol > 0.0) || o.samples_per_decade < 1) {
        throw ConfigError("shoot options: r_max >= 1, positive tolerances and samples_per_decade >= 1 required");
    }
}

// Growth rates of -Delta V_i at the origin: b1 = c2 e^{a2}, b2 = c1 e^{a1}.
std::array<double, 2> origin_rates(const Coefficients& k) { return {k.c2 * std::exp(k.a2), k.c1 * std::exp(k.a1)}; }

State series_state(const Coefficients& k, double r) {
    const auto b = origin_rates(k);
    const double r2 = r * r;
    const double r4 = r2 * r2;
    const double cross = b[0] * b[1];
    State s{};
    s[0] = k.a1 - b[0] * r2 / 4.0 + cross * r4 / 64.0;
    s[1] = k.a2 - b[1] * r2 / 4.0 + cross * r4 / 64.0;
    s[2] = -b[0] * r2 / 2.0 + cross * r4 / 16.0;
    s[3] = -b[1] * r2 / 2.0 + cross * r4 / 16.0;
    s[4] = -two_pi * s[2];
    s[5] = -two_pi * s[3];
    return s;
}

// Derivatives in r, scaled by `jac` = dr/d(variable).
void radial_rhs(const Coefficients& k, const State& x, State& dx, double r, double jac) {
    const double src1 = k.c2 * std::exp(x[1]) * r;  // drives V1
    const double src2 = k.c1 * std::exp(x[0]) * r;
    dx[0] = jac * x[2] / r;
    dx[1] = jac * x[3] / r;
    dx[2] = -jac * src1;
    dx[3] = -jac * src2;
    dx[4] = jac * two_pi * src1;
    dx[5] = jac * two_pi * src2;
}

// Radius below which the series start is used.
double start_radius(const Coefficients& k) {
    const auto b = origin_rates(k);
    return 1e-3 / std::sqrt(std::max({1.0, b[0], b[1]}));
}

// Integrates from the series start through every radius in `radii` (sorted, > start)
// and reports the state at each.
template <class Observer>
void integrate(const Coefficients& k, const std::vector<double>& radii, const ShootOptions& o, Observer&& observe) {
    const double r0 = start_radius(k);
    const double ceiling = std::max(k.a1, k.a2) + 1e-9;
    State x = series_state(k, r0);
    auto stepper = odeint::make_controlled(o.abs_tol, o.rel_tol, odeint::runge_kutta_fehlberg78<State>());

    auto guarded = [&](double r, const State& s) {
        if (!(s[0] <= ceiling && s[1] <= ceiling) || !std::isfinite(s[0]) || !std::isfinite(s[1])) {
            throw InternalError("radial solution is not decreasing; e^V would overflow");
        }
        observe(r, s);
    };

    std::vector<double> inner{r0};
    std::vector<double> outer{std::log(2.0)};
    for (double r : radii) {
        (r <= 1.0 ? inner : outer).push_back(r <= 1.0 ? r : std::log1p(r));
    }
    if (inner.back() < 1.0) inner.push_back(1.0);

    try {
        std::size_t seen = 0;
        odeint::integrate_times(
            stepper, [&](const State& s, State& d, double r) { radial_rhs(k, s, d, r, 1.0); }, x, inner.begin(),
            inner.end(), 1e-4 * r0,
            [&](const State& s, double r) {
                // skip the start and the added switch point unless requested
                if (seen > 0 && (r < 1.0 || (radii.size() > 0 && std::binary_search(radii.begin(), radii.end(), r)))) {
                    guarded(r, s);
                }
                ++seen;
            });
        if (outer.size() > 1) {
            odeint::integrate_times(
                stepper,
                [&](const State& s, State& d, double t) {
                    const double r = std::expm1(t);
                    radial_rhs(k, s, d, r, 1.0 + r);
                },
                x, outer.begin(), outer.end(), 1e-3,
                [&](const State& s, double t) {
                    if (t > outer.front()) guarded(std::expm1(t), s);
                });
        }
    } catch (const odeint::odeint_error& e) {
        throw StiffnessError(std::string("radial integration stalled: ") + e.what());
    }
}

std::vector<double> output_radii(const ShootOptions& o) {
    std::vector<double> radii;
    const int inner = 50;
    for (int n = 1; n <= inner; ++n) {
        radii.push_back(static_cast<double>(n) / inner);
    }
    const double decades = std::log10(o.r_max);
    const int count = std::max(1, static_cast<int>(std::ceil(decades * o.samples_per_decade)));
    for (int n = 1; n <= count; ++n) {
        radii.push_back(std::pow(10.0, decades * n / count));
    }
    radii.back() = o.r_max;
    return radii;
}

// Least-squares constant I in V(r) + slope ln r - amplitude (r / r_end)^exponent ~ I over
// the samples with r >= r_from.
double fit_constant(const RadialProfile& p, const std::vector<double>& v, double slope, double amplitude,
                    double exponent, double r_from, double r_end) {
    std::vector<double> ys;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (p.r[n] >= r_from) {
            ys.push_back(v[n] + slope * std::log(p.r[n]) - amplitude * std::pow(p.r[n] / r_end, exponent));
        }
    }
    return pairwise_sum(ys) / static_cast<double>(ys.size());
}

}  // namespace

RadialProfile shoot(double c1, double c2, double a1, double a2, const ShootOptions& options) {
    const Coefficients k{c1, c2, a1, a2};
    check_inputs(k, options);
    RadialProfile p;
    p.c1 = c1;
    p.c2 = c2;
    p.a1 = a1;
    p.a2 = a2;
    const auto push = [&](double r, const State& s) {
        p.r.push_back(r);
        p.v1.push_back(s[0]);
        p.v2.push_back(s[1]);
        p.dv1.push_back(s[2] / r);
        p.dv2.push_back(s[3] / r);
        p.mass1.push_back(s[4]);
        p.mass2.push_back(s[5]);
    };
    p.r.push_back(0.0);
    p.v1.push_back(a1);
    p.v2.push_back(a2);
    p.dv1.push_back(0.0);
    p.dv2.push_back(0.0);
    p.mass1.push_back(0.0);
    p.mass2.push_back(0.0);
    const double r0 = start_radius(k);
    std::vector<double> radii;
    for (double r : output_radii(options)) {
        if (r > r0) radii.push_back(r);
    }
    integrate(k, radii, options, push);
    return p;
}

std::vector<std::array<double, 4>> sample_profile(double c1, double c2, double a1, double a2,
                                                  std::span<const double> radii, const ShootOptions& options) {
    const Coefficients k{c1, c2, a1, a2};
    check_inputs(k, options);
    const double r0 = start_radius(k);
    std::vector<double> sorted;
    for (double r : radii) {
        if (!(r > 0.0)) throw ConfigError("sample radii must be positive");
        if (r > r0) sorted.push_back(r);
    }
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<std::array<double, 4>> at_sorted;
    integrate(k, sorted, options, [&](double r, const State& s) {
        at_sorted.push_back({s[0], s[1], s[2] / r, s[3] / r});
    });

    std::vector<std::array<double, 4>> out;
    for (double r : radii) {
        if (r <= r0) {
            const State s = series_state(k, r);
            out.push_back({s[0], s[1], s[2] / r, s[3] / r});
        } else {
            const auto it = std::lower_bound(sorted.begin(), sorted.end(), r);
            out.push_back(at_sorted[static_cast<std::size_t>(it - sorted.begin())]);
        }
    }
    return out;
}

bool finite_mass(const RadialProfile& p) {
    if (p.size() < 2) return false;
    const double r = p.r.back();
    return std::min(-r * p.dv1.back(), -r * p.dv2.back()) > 2.0;
}

double MassPair::identity_residual() const { return 1.0 / m1 + 1.0 / m2 - 1.0 / (2.0 * two_pi); }

MassPair masses(const RadialProfile& p) {
    if (p.size() < 10 || p.r.back() < 100.0) {
        throw ConfigError("masses need a profile integrated well into the tail (r_max >= 100)");
    }
    const double big_r = p.r.back();
    const double from = big_r / 10.0;
    const double w1 = big_r * p.dv1.back();
    const double w2 = big_r * p.dv2.back();

    MassPair m;
    m.m1 = -two_pi * w1;
    m.m2 = -two_pi * w2;
    // Beyond R, e^{V_o} ~ e^{V_o(R)} (r/R)^{-beta_o}, which makes the truncated mass
    // 2 pi c_o e^{V_o(R)} R^2 / (beta_o - 2) and gives V_i the correction
    // -c_o e^{V_o(R)} R^{beta_o} r^{2 - beta_o} / (beta_o - 2)^2. Masses and slopes depend on
    // each other: a few rounds of substitution settle both.
    const double v1_end = p.v1.back();
    const double v2_end = p.v2.back();
    for (int round = 0; round < 8; ++round) {
        const double beta1 = m.m1 / two_pi;
        const double beta2 = m.m2 / two_pi;
        if (!(beta1 > 2.0 && beta2 > 2.0)) {
            std::ostringstream msg;
            msg << "masses (" << m.m1 << ", " << m.m2 << ") do not both exceed 4 pi: not a finite-mass solution "
                << "or the profile has not reached its tail";
            throw ResolutionError(msg.str());
        }
        const double edge1 = p.c2 * std::exp(v2_end) * big_r * big_r;  // drives V1 past R
        const double edge2 = p.c1 * std::exp(v1_end) * big_r * big_r;
        const double tail1 = two_pi * edge1 / (beta2 - 2.0);
        const double tail2 = two_pi * edge2 / (beta1 - 2.0);
        m.flux_mass = {-two_pi * w1 + tail1, -two_pi * w2 + tail2};
        m.integral_mass = {p.mass1.back() + tail1, p.mass2.back() + tail2};
        m.m1 = m.flux_mass[0];
        m.m2 = m.flux_mass[1];
        m.i1 = fit_constant(p, p.v1, m.m1 / two_pi, -edge1 / ((beta2 - 2.0) * (beta2 - 2.0)), 2.0 - beta2, from, big_r);
        m.i2 = fit_constant(p, p.v2, m.m2 / two_pi, -edge2 / ((beta1 - 2.0) * (beta1 - 2.0)), 2.0 - beta1, from, big_r);
    }
    m.flux_integral_gap = std::max(std::abs(m.flux_mass[0] - m.integral_mass[0]),
                                   std::abs(m.flux_mass[1] - m.integral_mass[1]));
    if (m.flux_integral_gap > 1e-5) {
        std::ostringstream msg;
        msg << "flux and integral masses disagree by " << m.flux_integral_gap;
        throw ResolutionError(msg.str());
    }
    return m;
}

std::array<double, 2> mass_defect_identity(double m1, double m2) {
    const double eight_pi = 4.0 * two_pi;
    const double four_pi = 2.0 * two_pi;
    const double lhs = (m1 - eight_pi) + (m2 - eight_pi);
    return {lhs - (m1 - eight_pi) * (m1 - eight_pi) / (m1 - four_pi),
            lhs - (m2 - eight_pi) * (m2 - eight_pi) / (m2 - four_pi)};
}

EqualMassSolution solve_equal_masses(double c1, double c2, double a1, const ShootOptions& options) {
    EqualMassSolution sol;
    // Off the finite-mass band one flux stays below 4 pi while the other grows without
    // bound; the sign of the flux difference at r_max is still that of M1 - M2.
    const auto gap = [&](double a2) {
        ++sol.shots;
        const RadialProfile p = shoot(c1, c2, a1, a2, options);
        if (!finite_mass(p)) {
            return p.r.back() * (p.dv2.back() - p.dv1.back());
        }
        const MassPair m = masses(p);
        return m.m1 - m.m2;
    };

    double lo = a1;
    double g_lo = gap(lo);
    double hi = lo;
    double g_hi = g_lo;
    bool found = g_lo == 0.0;
    double scanned_lo = a1;
    double scanned_hi = a1;
    for (double step = 0.5; !found && step <= 8.0; step *= 2.0) {
        for (double sign : {1.0, -1.0}) {
            const double a = a1 + sign * step;
            const double g = gap(a);
            scanned_lo = std::min(scanned_lo, a);
            scanned_hi = std::max(scanned_hi, a);
            if (g == 0.0 || (g < 0.0) != (g_lo < 0.0)) {
                // the previous probe on this side is the tighter end of the bracket
                const double previous = a1 + sign * (step == 0.5 ? 0.0 : 0.5 * step);
                lo = std::min(previous, a);
                hi = std::max(previous, a);
                g_lo = lo == a ? g : gap(lo);
                g_hi = hi == a ? g : gap(hi);
                found = true;
                break;
            }
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg << "no sign change of M1 - M2 for a2 in [" << scanned_lo << ", " << scanned_hi << "]";
        throw BracketError(msg.str());
    }
    sol.bracket = {lo, hi};

    double root = lo;
    if (g_lo == 0.0) {
        root = lo;
    } else if (g_hi == 0.0) {
        root = hi;
    } else {
        std::uintmax_t iterations = 100;
        const auto [left, right] = boost::math::tools::toms748_solve(
            gap, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(48), iterations);
        root = 0.5 * (left + right);
    }
    sol.a2 = root;
    sol.profile = shoot(c1, c2, a1, root, options);
    sol.masses = masses(sol.profile);
    ++sol.shots;
    return sol;
}

double linearized_kernel_residual(const RadialProfile& p, double h) {
    if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
    struct Point {
        double x, y;
    };
    std::vector<Point> centres;
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        for (double theta : {0.3, 1.1, 2.0}) {
            centres.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }
    const std::array<Point, 5> stencil{Point{0, 0}, Point{h, 0}, Point{-h, 0}, Point{0, h}, Point{0, -h}};
    std::vector<double> radii;
    for (const Point& c : centres) {
        for (const Point& s : stencil) {
            radii.push_back(std::hypot(c.x + s.x, c.y + s.y));
        }
    }
    const auto vals = sample_profile(p.c1, p.c2, p.a1, p.a2, radii);

    double worst = 0.0;
    for (std::size_t n = 0; n < centres.size(); ++n) {
        // modes at each stencil node: translation (phi1, phi2), scaling (psi1, psi2)
        std::array<std::array<double, 4>, 5> modes{};
        for (std::size_t s = 0; s < 5; ++s) {
            const std::size_t idx = 5 * n + s;
            const double x = centres[n].x + stencil[s].x;
            const double r = radii[idx];
            const auto& v = vals[idx];
            modes[s] = {v[2] * x / r, v[3] * x / r, r * v[2] + 2.0, r * v[3] + 2.0};
        }
        const auto& centre = vals[5 * n];
        const std::array<double, 2> weight{p.c2 * std::exp(centre[1]), p.c1 * std::exp(centre[0])};
        for (int mode = 0; mode < 2; ++mode) {
            for (int comp = 0; comp < 2; ++comp) {
                const std::size_t m = static_cast<std::size_t>(2 * mode + comp);
                const std::size_t other = static_cast<std::size_t>(2 * mode + 1 - comp);
                const double lap =
                    (modes[1][m] + modes[2][m] + modes[3][m] + modes[4][m] - 4.0 * modes[0][m]) / (h * h);
                worst = std::max(worst, std::abs(lap + weight[static_cast<std::size_t>(comp)] * modes[0][other]));
            }
        }
    }
    return worst;
}

std::vector<MassPair> shoot_masses(std::span<const ShotParameters> shots, const ShootOptions& options, Exec exec) {
    return map_indices<MassPair>(exec, shots.size(), [&](std::size_t n) {
        const ShotParameters& s = shots[n];
        return masses(shoot(s.c1, s.c2, s.a1, s.a2, options));
    });
}

}  // namespace tg
