#include "tg/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "tg/error.hpp"
#include "tg/quadrature.hpp"

namespace tg {
namespace {

constexpr double pi = std::numbers::pi;

using PointFunction = std::function<double(cplx)>;

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Counter-clockwise parallelogram centre + [-1/2, 1/2] u + [-1/2, 1/2] v (Im(v/u) > 0).
std::vector<cplx> parallelogram(cplx centre, cplx u, cplx v) {
    return {centre - 0.5 * u - 0.5 * v, centre + 0.5 * u - 0.5 * v, centre + 0.5 * u + 0.5 * v,
            centre - 0.5 * u + 0.5 * v};
}

double inradius(const std::vector<cplx>& polygon, cplx centre) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < polygon.size(); ++k) {
        const cplx a = polygon[k];
        const cplx e = polygon[(k + 1) % polygon.size()] - a;
        r = std::min(r, std::abs(cross(e, centre - a)) / std::abs(e));
    }
    return r;
}

// One angular quadrature node of a polar sector: direction and the distance from the
// centre to the polygon edge along it.
struct Ray {
    double theta;
    double weight;
    double reach;
};

std::vector<Ray> polygon_rays(cplx centre, const std::vector<cplx>& polygon, int panels, int nodes) {
    const GaussRule& rule = gauss_legendre(nodes);
    std::vector<Ray> rays;
    for (std::size_t k = 0; k < polygon.size(); ++k) {
        const cplx a = polygon[k] - centre;
        const cplx b = polygon[(k + 1) % polygon.size()] - centre;
        const double ta = std::arg(a);
        double tb = std::arg(b);
        while (tb <= ta) tb += 2.0 * pi;
        const cplx e = b - a;
        for (int p = 0; p < panels; ++p) {
            const ScaledRule panel = scaled(ta + (tb - ta) * p / panels, ta + (tb - ta) * (p + 1) / panels);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double theta = panel.node(rule, i);
                const cplx dir = std::polar(1.0, theta);
                rays.push_back({theta, panel.weight(rule, i), cross(a, e) / cross(dir, e)});
            }
        }
    }
    return rays;
}

// int over the polygon minus B_rho(centre) of F, in polar coordinates with log-radius
// panels; F may grow like r^-4 towards the ball.
double polar_region(cplx centre, double rho, const std::vector<cplx>& polygon, const PointFunction& f,
                    const SingularQuadratureSettings& s) {
    const auto rays = polygon_rays(centre, polygon, s.outer_panels, s.outer_nodes);
    const GaussRule& rule = gauss_legendre(s.outer_nodes);
    const auto per_ray = map_indices<double>(s.exec, rays.size(), [&](std::size_t k) {
        const Ray& ray = rays[k];
        const double lo = std::log(rho);
        const double hi = std::log(ray.reach);
        std::vector<double> terms;
        terms.reserve(static_cast<std::size_t>(s.outer_panels) * rule.nodes.size());
        for (int p = 0; p < s.outer_panels; ++p) {
            const ScaledRule panel = scaled(lo + (hi - lo) * p / s.outer_panels, lo + (hi - lo) * (p + 1) / s.outer_panels);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double r = std::exp(panel.node(rule, i));
                terms.push_back(panel.weight(rule, i) * r * r * f(centre + std::polar(r, ray.theta)));
            }
        }
        return ray.weight * pairwise_sum(terms);
    });
    return pairwise_sum(per_ray);
}

// Radii bounding the rings: outer ball radius first, then down through the delta
// sequence, splitting each gap into octaves.
struct RingPlan {
    std::vector<double> bounds;       // decreasing, bounds[0] = rho
    std::vector<std::size_t> marks;   // index into bounds of each delta
    std::vector<double> deltas;
};

RingPlan plan_rings(double rho, const SingularQuadratureSettings& s) {
    RingPlan plan;
    plan.deltas = s.delta_sequence;
    if (plan.deltas.empty()) {
        for (int m = 0; m < s.delta_levels; ++m) {
            plan.deltas.push_back(0.5 * rho / std::pow(2.0, m));
        }
    }
    if (!(plan.deltas.front() < rho)) {
        std::ostringstream msg;
        msg << "delta sequence starts at " << plan.deltas.front() << ", which is not below the ball radius " << rho;
        throw ConfigError(msg.str());
    }
    plan.bounds.push_back(rho);
    for (double d : plan.deltas) {
        const double outer = plan.bounds.back();
        const int pieces = std::max(1, static_cast<int>(std::ceil(std::log2(outer / d) - 1e-9)));
        for (int p = 1; p <= pieces; ++p) {
            plan.bounds.push_back(outer * std::pow(d / outer, static_cast<double>(p) / pieces));
        }
        plan.bounds.back() = d;
        plan.marks.push_back(plan.bounds.size() - 1);
    }
    return plan;
}

// Per ring, int_{ring} (e^{f} - 1) / r^4 dA with f given as a function of the point.
std::vector<double> ring_values(cplx centre, const RingPlan& plan, const PointFunction& exponent,
                                const SingularQuadratureSettings& s) {
    const GaussRule& rule = gauss_legendre(s.radial_nodes);
    const std::size_t rings = plan.bounds.size() - 1;
    const std::size_t nr = rule.nodes.size();
    const auto node_values = map_indices<double>(s.exec, rings * nr, [&](std::size_t k) {
        const std::size_t ring = k / nr;
        const std::size_t i = k % nr;
        const ScaledRule radial = scaled(plan.bounds[ring + 1], plan.bounds[ring]);
        const double r = radial.node(rule, i);
        std::vector<double> around(static_cast<std::size_t>(s.angular_nodes));
        for (int m = 0; m < s.angular_nodes; ++m) {
            const double theta = 2.0 * pi * (m + 0.5) / s.angular_nodes;
            around[static_cast<std::size_t>(m)] = std::expm1(exponent(centre + std::polar(r, theta)));
        }
        const double mean = pairwise_sum(around) / s.angular_nodes;
        return radial.weight(rule, i) * 2.0 * pi * mean / (r * r * r);
    });
    std::vector<double> out(rings);
    for (std::size_t ring = 0; ring < rings; ++ring) {
        out[ring] = pairwise_sum(std::span<const double>(node_values).subspan(ring * nr, nr));
    }
    return out;
}

struct BracketPass {
    double value;
    double richardson_error;
    std::vector<RingContribution> rings;
};

// lim_{delta -> 0} [ int_{region \ B_delta} P - pi / delta^2 ] given the integral of P
// outside the ball of radius rho and the exponent of e^{f} = P r^4 inside it.
BracketPass bracket_pass(cplx centre, double rho, double outside, const PointFunction& exponent,
                         const SingularQuadratureSettings& s) {
    const RingPlan plan = plan_rings(rho, s);
    const auto rings = ring_values(centre, plan, exponent, s);
    std::vector<double> partial;
    std::size_t next = 0;
    std::vector<double> acc;
    for (std::size_t mark : plan.marks) {
        while (next < mark) {
            acc.push_back(rings[next]);
            ++next;
        }
        partial.push_back(pairwise_sum(acc));
    }
    const double ratio = plan.deltas.size() > 1 ? plan.deltas[0] / plan.deltas[1] : 2.0;
    const Extrapolation inner = richardson(partial, ratio, 2);
    BracketPass out;
    out.value = inner.value + outside - pi / (rho * rho);
    out.richardson_error = inner.error;
    for (std::size_t k = 0; k < rings.size(); ++k) {
        out.rings.push_back({plan.bounds[k + 1], plan.bounds[k], rings[k]});
    }
    return out;
}

// exp(-8 pi G(z)) without evaluating G at its pole: |w|^4 exp(-8 pi gamma(w)).
double green_damping(cplx z, const GreenFunction& green) {
    const cplx w = nearest_image(z, green.basis());
    const double r2 = std::norm(w);
    return r2 * r2 * std::exp(-8.0 * pi * green.regular(w));
}

struct DPass {
    BracketPass bracket;
    double rho;
};

DPass d_pass(cplx q, const GreenFunction& green, const SingularQuadratureSettings& s) {
    const LatticeBasis& basis = green.basis();
    const auto polygon = parallelogram(q, basis.reduced1(), basis.reduced2());
    const double gq = green.value(q);
    const double robin = green.robin();
    const double rho = 0.5 * std::min(inradius(polygon, q), std::abs(nearest_image(q, basis)));
    const PointFunction periodic = [&](cplx z) {
        return std::exp(8.0 * pi * (green.value(z - q) - robin + gq)) * green_damping(z, green);
    };
    const PointFunction exponent = [&](cplx z) {
        return 8.0 * pi * ((green.regular(z - q) - robin) + gq - green.value(z));
    };
    const double outside = polar_region(q, rho, polygon, periodic, s);
    return {bracket_pass(q, rho, outside, exponent, s), rho};
}

void check_convergence(double value, double error, double scale, const std::string& what) {
    if (!std::isfinite(value) || !std::isfinite(error) || error > 1e-4 * std::max(std::abs(value), scale)) {
        std::ostringstream msg;
        msg << what << " did not converge: value " << value << ", error estimate " << error;
        throw QuadratureError(msg.str());
    }
}

// Rectangle [s0, s1] x [t0, t1] in fractional coordinates.
struct Rect {
    double s0, s1, t0, t1;
};

// Rectangles covering a minus b (all in fractional coordinates).
std::vector<Rect> subtract(const Rect& a, const Rect& b) {
    const double s0 = std::max(a.s0, b.s0);
    const double s1 = std::min(a.s1, b.s1);
    const double t0 = std::max(a.t0, b.t0);
    const double t1 = std::min(a.t1, b.t1);
    if (!(s0 < s1 && t0 < t1)) {
        return {a};
    }
    std::vector<Rect> out;
    if (a.t0 < t0) out.push_back({a.s0, a.s1, a.t0, t0});
    if (t1 < a.t1) out.push_back({a.s0, a.s1, t1, a.t1});
    if (a.s0 < s0) out.push_back({a.s0, s0, t0, t1});
    if (s1 < a.s1) out.push_back({s1, a.s1, t0, t1});
    return out;
}

// Pieces of [c - h, c + h] modulo 1 inside [0, 1].
std::vector<std::array<double, 2>> wrapped_interval(double c, double h) {
    if (2.0 * h >= 1.0) {
        return {{0.0, 1.0}};
    }
    const double lo = c - h - std::floor(c - h);
    const double hi = lo + 2.0 * h;
    if (hi <= 1.0) {
        return {{lo, hi}};
    }
    return {{lo, 1.0}, {0.0, hi - 1.0}};
}

double tensor_rule(const Rect& r, const std::function<double(double, double)>& f, int n, Exec exec) {
    const GaussRule& rule = gauss_legendre(n);
    const ScaledRule rs = scaled(r.s0, r.s1);
    const ScaledRule rt = scaled(r.t0, r.t1);
    const std::size_t nn = rule.nodes.size();
    const auto vals = map_indices<double>(exec, nn * nn, [&](std::size_t k) {
        const std::size_t i = k / nn;
        const std::size_t j = k % nn;
        return rs.weight(rule, i) * rt.weight(rule, j) * f(rs.node(rule, i), rt.node(rule, j));
    });
    return pairwise_sum(vals);
}

double adaptive_rect(const Rect& r, const std::function<double(double, double)>& f, int n, double tol, Exec exec,
                     int depth, double& error) {
    const double whole = tensor_rule(r, f, n, exec);
    const double sm = 0.5 * (r.s0 + r.s1);
    const double tm = 0.5 * (r.t0 + r.t1);
    const std::array<Rect, 4> kids{Rect{r.s0, sm, r.t0, tm}, Rect{sm, r.s1, r.t0, tm}, Rect{r.s0, sm, tm, r.t1},
                                   Rect{sm, r.s1, tm, r.t1}};
    std::array<double, 4> parts{};
    for (int k = 0; k < 4; ++k) {
        parts[static_cast<std::size_t>(k)] = tensor_rule(kids[static_cast<std::size_t>(k)], f, n, exec);
    }
    const double split = pairwise_sum(parts);
    if (std::abs(split - whole) <= tol || depth >= 10) {
        error += std::abs(split - whole);
        return split;
    }
    for (int k = 0; k < 4; ++k) {
        parts[static_cast<std::size_t>(k)] =
            adaptive_rect(kids[static_cast<std::size_t>(k)], f, n, 0.25 * tol, exec, depth + 1, error);
    }
    return pairwise_sum(parts);
}

struct CellGeometry {
    std::vector<cplx> own;      // parallelogram around q_j, inside B_delta(q_j)
    std::vector<Rect> rest;     // the cell minus `own`, in fractional coordinates
    double rho;
};

CellGeometry cell_geometry(std::size_t j, const BlowupConfig& blowup, const VortexConfig& vortices,
                           const LatticeBasis& basis) {
    const PartitionSpec& part = blowup.partition;
    const cplx q = blowup.q[j].z;
    const double eta = std::min(0.5, part.delta / (std::abs(basis.omega1()) + std::abs(basis.omega2())));
    CellGeometry g;
    g.own = parallelogram(q, 2.0 * eta * basis.omega1(), 2.0 * eta * basis.omega2());

    const auto [sq, tq] = basis.to_fractional(q);
    std::vector<Rect> holes;
    for (const auto& si : wrapped_interval(sq, eta)) {
        for (const auto& ti : wrapped_interval(tq, eta)) {
            holes.push_back({si[0], si[1], ti[0], ti[1]});
        }
    }
    for (const Patch& p : part.cell_for(static_cast<int>(j)).patches) {
        std::vector<Rect> pieces{{p.s0, p.s1, p.t0, p.t1}};
        for (const Rect& h : holes) {
            std::vector<Rect> next;
            for (const Rect& piece : pieces) {
                for (const Rect& r : subtract(piece, h)) {
                    next.push_back(r);
                }
            }
            pieces = std::move(next);
        }
        g.rest.insert(g.rest.end(), pieces.begin(), pieces.end());
    }

    double clearance = std::min(inradius(g.own, q), 0.5 * std::abs(basis.reduced1()));
    for (std::size_t l = 0; l < blowup.k(); ++l) {
        if (l != j) {
            clearance = std::min(clearance, torus_distance(q, blowup.q[l].z, basis));
        }
    }
    for (int c = 1; c <= 2; ++c) {
        for (const TorusPoint& p : vortices.points(c)) {
            clearance = std::min(clearance, torus_distance(q, p.z, basis));
        }
    }
    g.rho = 0.5 * clearance;
    return g;
}

struct D2Pass {
    double value;
    std::vector<D2Term> terms;
};

D2Pass d2_pass(const BlowupConfig& blowup, const VortexConfig& vortices, const GreenFunction& green,
               const SingularQuadratureSettings& s, WeightDenominator denominator) {
    const LatticeBasis& basis = green.basis();
    D2Pass out{0.0, {}};
    std::vector<double> weighted;
    for (std::size_t j = 0; j < blowup.k(); ++j) {
        const CellGeometry geo = cell_geometry(j, blowup, vortices, basis);
        const cplx q = blowup.q[j].z;
        for (int i = 1; i <= 2; ++i) {
            const PointFunction exponent = [&](cplx x) {
                try {
                    return local_deviation(x, i, j, blowup, vortices, green);
                } catch (const SingularityError&) {
                    return -std::numeric_limits<double>::infinity();
                }
            };
            const PointFunction periodic = [&](cplx x) {
                const double d = std::abs(nearest_image(x - q, basis));
                const double d2 = d * d;
                return std::exp(exponent(x)) / (d2 * d2);
            };
            const double own = polar_region(q, geo.rho, geo.own, periodic, s);
            double patch_error = 0.0;
            std::vector<double> rest;
            const double tol = s.patch_tolerance * pi / (geo.rho * geo.rho);
            for (const Rect& r : geo.rest) {
                rest.push_back(adaptive_rect(
                    r, [&](double a, double b) { return basis.area() * periodic(basis.from_fractional(a, b)); },
                    s.outer_nodes, tol, s.exec, 0, patch_error));
            }
            const BracketPass bp = bracket_pass(q, geo.rho, own + pairwise_sum(rest), exponent, s);

            double log_weight = bubble_log_weight_reduced(j, blowup.q, green);
            if (denominator == WeightDenominator::first_point) {
                log_weight += background(i, q, vortices, green) - background(i, blowup.q[0].z, vortices, green);
            }
            const double weight = std::exp(log_weight);
            if (!(weight > 0.0) || !std::isfinite(weight)) {
                throw InternalError("D^2 weight is not a positive finite number");
            }
            out.terms.push_back({j, i, weight, bp.value, bp.richardson_error + patch_error});
            weighted.push_back(weight * bp.value);
        }
    }
    out.value = pairwise_sum(weighted);
    return out;
}

}  // namespace

void SingularQuadratureSettings::validate() const {
    if (angular_nodes <= 0 || angular_nodes % 4 != 0) {
        throw ConfigError("angular_nodes must be a positive multiple of 4");
    }
    if (radial_nodes <= 0 || outer_nodes <= 0 || outer_panels <= 0 || delta_levels < 2) {
        throw ConfigError("quadrature node and panel counts must be positive");
    }
    if (!(outer_cutoff >= 0.0) || !(patch_tolerance > 0.0)) {
        throw ConfigError("outer_cutoff must be non-negative and patch_tolerance positive");
    }
    for (std::size_t k = 0; k < delta_sequence.size(); ++k) {
        if (!(delta_sequence[k] > 0.0) || (k > 0 && !(delta_sequence[k] < delta_sequence[k - 1]))) {
            throw ConfigError("delta_sequence must be positive and strictly decreasing");
        }
        if (k > 1) {
            const double r0 = delta_sequence[0] / delta_sequence[1];
            const double rk = delta_sequence[k - 1] / delta_sequence[k];
            if (std::abs(rk - r0) > 1e-9 * r0) {
                throw ConfigError("delta_sequence must be geometric for Richardson extrapolation");
            }
        }
    }
}

SingularQuadratureSettings SingularQuadratureSettings::refined() const {
    SingularQuadratureSettings r = *this;
    r.angular_nodes *= 2;
    r.radial_nodes *= 2;
    r.outer_nodes *= 2;
    r.refine_check = false;
    return r;
}

std::string to_string(SignBand band) {
    switch (band) {
        case SignBand::negative:
            return "negative";
        case SignBand::zero_within_tol:
            return "zero_within_tol";
        case SignBand::positive:
            return "positive";
    }
    return "zero_within_tol";
}

namespace {

DFunctionalResult d_functional_once(cplx q, const GreenFunction& green, const SingularQuadratureSettings& settings) {
    DFunctionalResult out;
    const double gq = green.value(q);
    const double damping = std::exp(-8.0 * pi * gq);
    if (!(damping > 0.0) || !std::isfinite(damping)) {
        throw InternalError("D weight exp(-8 pi G(q)) is not a positive finite number");
    }
    out.exponent_gradient = 8.0 * pi * green.gradient(q).norm();
    if (out.exponent_gradient >= 1e-6) {
        std::ostringstream msg;
        msg << "q is not a critical point of G (|grad h(q)| = " << out.exponent_gradient
            << "); the principal value may not exist";
        out.warnings.push_back(msg.str());
    }
    const DPass base = d_pass(q, green, settings);
    out.ball_radius = base.rho;
    out.bracket = base.bracket.value;
    out.bracket_error = base.bracket.richardson_error;
    out.rings = base.bracket.rings;
    if (settings.refine_check) {
        const DPass fine = d_pass(q, green, settings.refined());
        out.bracket_error += std::abs(fine.bracket.value - base.bracket.value);
    }
    out.value = damping * out.bracket;
    out.error = damping * out.bracket_error;
    check_convergence(out.value, out.error, damping * 1e-6 * pi / (base.rho * base.rho), "D(q) quadrature");
    return out;
}

// One evaluation at fixed settings, with the refinement pass and the convergence check.
D2Result d2_converged(const BlowupConfig& blowup, const VortexConfig& vortices, const GreenFunction& green,
                      const SingularQuadratureSettings& settings, WeightDenominator denominator) {
    const D2Pass base = d2_pass(blowup, vortices, green, settings, denominator);
    D2Result out;
    out.value = base.value;
    out.terms = base.terms;
    std::vector<double> errs;
    for (const D2Term& t : base.terms) {
        errs.push_back(t.weight * t.error);
    }
    if (settings.refine_check) {
        const D2Pass fine = d2_pass(blowup, vortices, green, settings.refined(), denominator);
        for (std::size_t n = 0; n < base.terms.size(); ++n) {
            const double diff = std::abs(fine.terms[n].bracket - base.terms[n].bracket);
            out.terms[n].error += diff;
            errs[n] += base.terms[n].weight * diff;
        }
    }
    out.error = pairwise_sum(errs);
    double scale = 0.0;
    for (const D2Term& t : base.terms) {
        const CellGeometry geo = cell_geometry(t.j, blowup, vortices, green.basis());
        scale = std::max(scale, t.weight * 1e-6 * pi / (geo.rho * geo.rho));
    }
    check_convergence(out.value, out.error, scale, "D^2 quadrature");
    return out;
}

// Retries with a longer default delta sequence while the extrapolation has not converged.
template <class F>
auto with_deepening(const SingularQuadratureSettings& settings, F&& attempt) {
    SingularQuadratureSettings s = settings;
    while (true) {
        try {
            return attempt(s);
        } catch (const QuadratureError&) {
            if (!s.delta_sequence.empty() || s.delta_levels >= 8) throw;
            s.delta_levels = std::min(8, s.delta_levels + 2);
        }
    }
}

}  // namespace

DFunctionalResult d_functional(cplx q, const GreenFunction& green, const SingularQuadratureSettings& settings) {
    settings.validate();
    return with_deepening(settings, [&](const SingularQuadratureSettings& s) { return d_functional_once(q, green, s); });
}

D2Result d2_functional(const BlowupConfig& blowup, const VortexConfig& vortices, const GreenFunction& green,
                       const SingularQuadratureSettings& settings, WeightDenominator denominator) {
    settings.validate();
    validate(blowup, vortices, green.basis());
    for (std::size_t j = 0; j < blowup.k(); ++j) {
        for (int i = 1; i <= 2; ++i) {
            if (std::abs(blowup.mass(i, j) - default_mass) > 1e-12 * default_mass) {
                throw ConfigError("D^2 is defined for masses 8 pi only");
            }
        }
    }
    D2Result out;
    const std::size_t two_k = 2 * blowup.k();
    if (vortices.p1.size() != two_k || vortices.p2.size() != two_k) {
        out.warnings.push_back("vortex counts differ from 2k; the local exponents are not harmonic");
    }
    for (std::size_t j = 0; j < blowup.k(); ++j) {
        for (int i = 1; i <= 2; ++i) {
            const double g = local_deviation_gradient(blowup.q[j].z, i, j, blowup, vortices, green).norm();
            if (g >= 1e-6) {
                std::ostringstream msg;
                msg << "|grad f_" << i << "," << j + 1 << "(q_" << j + 1 << ")| = " << g
                    << " exceeds 1e-6; the principal value may not exist";
                out.warnings.push_back(msg.str());
            }
        }
    }
    const auto passes = with_deepening(settings, [&](const SingularQuadratureSettings& s) {
        return d2_converged(blowup, vortices, green, s, denominator);
    });
    out.value = passes.value;
    out.error = passes.error;
    out.terms = passes.terms;
    return out;
}

ClosedD2Result d2_two_vortex_closed(cplx q, cplx p1, cplx p2, const GreenFunction& green,
                                    const SingularQuadratureSettings& settings) {
    ClosedD2Result out;
    out.first = d_functional(q - p1, green, settings);
    out.second = d_functional(q - p2, green, settings);
    for (const auto* d : {&out.first, &out.second}) {
        out.warnings.insert(out.warnings.end(), d->warnings.begin(), d->warnings.end());
    }
    const double w1 = std::exp(8.0 * pi * green.value(q - p1));
    const double w2 = std::exp(8.0 * pi * green.value(q - p2));
    out.literal = out.first.value * w1 + out.second.value * w2;
    out.literal_error = out.first.error * w1 + out.second.error * w2;
    const double robin_weight = std::exp(8.0 * pi * green.robin());
    out.value = robin_weight * out.literal;
    out.error = robin_weight * out.literal_error;
    return out;
}

AdmissibilityReport necessary_conditions_report(const BlowupConfig& blowup, const VortexConfig& vortices,
                                                const GreenFunction& green,
                                                const SingularQuadratureSettings& settings) {
    validate(blowup, vortices, green.basis());
    AdmissibilityReport rep;

    CensusOptions copt;
    copt.exec = settings.exec;
    const CriticalCensus census = find_critical_points(green, copt);
    rep.census_count = census.count;
    int hp = 0;
    int extra = 0;
    for (const CriticalPoint& p : census.points) {
        const std::string label = p.kind == PointKind::half_period ? "half_period_" + std::to_string(++hp)
                                                                   : "extra_" + std::to_string(++extra);
        const DFunctionalResult d = d_functional(p.point.z, green, settings);
        rep.d_values.push_back({label, p.point.z, d.value, d.error});
    }

    rep.cond1 = condition1_residual(blowup.q, vortices, green);
    for (std::size_t j = 0; j < blowup.k(); ++j) {
        const Vec2 g1 = interaction_energy_gradient(1, j, blowup.q, vortices, green);
        const Vec2 g2 = interaction_energy_gradient(2, j, blowup.q, vortices, green);
        rep.cond2.push_back({g1, g2});
        rep.cond2_max = std::max({rep.cond2_max, g1.norm(), g2.norm()});
    }
    rep.cond1_pass = rep.cond1 < condition_tolerance;
    rep.cond2_pass = rep.cond2_max < condition_tolerance;

    try {
        rep.d2 = d2_functional(blowup, vortices, green, settings);
        rep.warnings.insert(rep.warnings.end(), rep.d2->warnings.begin(), rep.d2->warnings.end());
        const double band = std::max(1e-8, 3.0 * rep.d2->error);
        rep.cond3_sign = rep.d2->value > band    ? SignBand::positive
                         : rep.d2->value < -band ? SignBand::negative
                                                 : SignBand::zero_within_tol;
        rep.cond3_pass = *rep.cond3_sign != SignBand::positive;
    } catch (const QuadratureError& e) {
        rep.warnings.push_back(std::string("D^2 not evaluated: ") + e.what());
        rep.cond3_pass = false;
    }
    rep.verdict_pass = rep.cond1_pass && rep.cond2_pass && rep.cond3_pass;
    return rep;
}

PairedVortexStudy paired_vortex_study(const GreenFunction& green, cplx p1, int translate,
                                      const SingularQuadratureSettings& settings) {
    if (translate < 1 || translate > 3) {
        throw ConfigError("half-period translate index must be 1, 2 or 3");
    }
    const LatticeBasis& basis = green.basis();
    PairedVortexStudy study;
    study.translate = translate;
    const cplx shift = half_periods(basis)[static_cast<std::size_t>(translate - 1)].z;
    study.p1 = reduce_to_fundamental(p1, basis).z;
    study.p2 = reduce_to_fundamental(p1 + shift, basis).z;

    CensusOptions copt;
    copt.exec = settings.exec;
    study.census = find_critical_points(green, copt);
    // Near a 3-5 transition an extra point can sit within 1e-7 of a four-torsion point,
    // so proximity alone does not decide; the translate must itself be critical.
    const double match = std::max(1e-7, 1e3 * copt.dedup_tol);
    const double critical_gradient = 100.0 * copt.newton_tol;
    for (const CriticalPoint& c : study.census.points) {
        if (c.kind == PointKind::extra_pair_member) {
            study.extra_four_torsion.push_back(is_four_torsion(c.point.z, basis, 10.0 * basis.point_tolerance()));
        }
    }
    for (const CriticalPoint& c : study.census.points) {
        const bool partner = std::any_of(study.census.points.begin(), study.census.points.end(),
                                         [&](const CriticalPoint& d) {
                                             return torus_distance(c.point.z - shift, d.point.z, basis) < match;
                                         });
        if (!partner || green.gradient(c.point.z - shift).norm() > critical_gradient) continue;
        PairedVortexCandidate cand;
        cand.offset = c.point.z;
        cand.q = reduce_to_fundamental(study.p1 + c.point.z, basis).z;
        cand.offset_is_extra = c.kind == PointKind::extra_pair_member;
        if (cand.offset_is_extra) study.extra_pair_excluded = false;

        const VortexConfig vortices{{{study.p1}, {study.p1}}, {{study.p2}, {study.p2}}};
        BlowupConfig blowup;
        blowup.q = {{cand.q}};
        const double clearance =
            std::min(torus_distance(cand.q, study.p1, basis), torus_distance(cand.q, study.p2, basis));
        blowup.partition = PartitionSpec::whole_torus(0.25 * clearance);
        cand.report = necessary_conditions_report(blowup, vortices, green, settings);
        study.candidates.push_back(std::move(cand));
    }
    return study;
}

ExteriorIntegral exterior_integral(cplx q, const LatticeBasis& basis, const SingularQuadratureSettings& settings) {
    settings.validate();
    const auto polygon = parallelogram(q, basis.reduced1(), basis.reduced2());
    const double diam = std::max(std::abs(basis.reduced1() + basis.reduced2()),
                                 std::abs(basis.reduced1() - basis.reduced2()));
    const double cutoff = settings.outer_cutoff > 0.0 ? settings.outer_cutoff : 6.0 * diam;

    // B_R minus the parallelogram, polar around q from the edge out to R
    const auto rays = polygon_rays(q, polygon, settings.outer_panels, settings.outer_nodes);
    const GaussRule& rule = gauss_legendre(settings.outer_nodes);
    const auto per_ray = map_indices<double>(settings.exec, rays.size(), [&](std::size_t k) {
        const Ray& ray = rays[k];
        const double lo = std::log(ray.reach);
        const double hi = std::log(cutoff);
        std::vector<double> terms;
        for (int p = 0; p < settings.outer_panels; ++p) {
            const ScaledRule panel =
                scaled(lo + (hi - lo) * p / settings.outer_panels, lo + (hi - lo) * (p + 1) / settings.outer_panels);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double r = std::exp(panel.node(rule, i));
                terms.push_back(panel.weight(rule, i) / (r * r));
            }
        }
        return ray.weight * pairwise_sum(terms);
    });
    ExteriorIntegral out;
    out.tail_route = pi / (cutoff * cutoff) + pairwise_sum(per_ray);

    const double rho = 0.5 * inradius(polygon, q);
    const double inside = polar_region(
        q, rho, polygon,
        [&](cplx z) {
            const double r2 = std::norm(z - q);
            return 1.0 / (r2 * r2);
        },
        settings);
    out.complement_route = pi / (rho * rho) - inside;
    return out;
}

MonteCarloEstimate exterior_integral_monte_carlo(cplx q, const LatticeBasis& basis, std::size_t samples,
                                                 std::uint64_t seed) {
    if (samples < 2) {
        throw ConfigError("Monte-Carlo estimate needs at least two samples");
    }
    const cplx u = basis.reduced1();
    const cplx v = basis.reduced2();
    const auto polygon = parallelogram(q, u, v);
    const double r_in = inradius(polygon, q);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t outside = 0;
    for (std::size_t n = 0; n < samples; ++n) {
        // density 2 r_in^2 / r^3 on [r_in, inf): r = r_in / sqrt(U)
        const double r = r_in / std::sqrt(1.0 - unit(rng));
        const double theta = 2.0 * pi * unit(rng);
        const auto [s, t] = basis.to_reduced_fractional(std::polar(r, theta));
        if (std::abs(s) >= 0.5 || std::abs(t) >= 0.5) {
            ++outside;
        }
    }
    const double p = static_cast<double>(outside) / static_cast<double>(samples);
    const double scale = pi / (r_in * r_in);
    return {scale * p, scale * std::sqrt(p * (1.0 - p) / static_cast<double>(samples - 1))};
}

}  // namespace tg
