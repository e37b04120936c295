#include "tg/census.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "tg/error.hpp"

namespace tg {
namespace {

constexpr double pi = std::numbers::pi;

struct SeedResult {
    enum class Status { accepted, left_cell, not_converged, excluded } status = Status::excluded;
    cplx z;
    double gradient_norm = 0.0;
    double uncertainty = 0.0;  // location error bound from polishing and gradient noise
};

int morse_index(MorseType t) {
    switch (t) {
        case MorseType::min:
        case MorseType::max:
            return 1;
        case MorseType::saddle:
            return -1;
        case MorseType::degenerate:
            return 0;
    }
    return 0;
}

double wrap_angle(double a) {
    while (a > pi) a -= 2.0 * pi;
    while (a <= -pi) a += 2.0 * pi;
    return a;
}

// Fundamental representative with fractional coordinates within tol of 1 moved
// next to 0.
cplx edge_normalized(cplx z, const LatticeBasis& basis, double tol) {
    auto [s, t] = basis.to_fractional(reduce_to_fundamental(z, basis).z);
    if (s > 1.0 - tol) s -= 1.0;
    if (t > 1.0 - tol) t -= 1.0;
    return basis.from_fractional(s, t);
}

// Lexicographic order on fractional coordinates, treating differences below tol
// as ties.
bool canonical_less(cplx a, cplx b, const LatticeBasis& basis, double tol) {
    const auto [sa, ta] = basis.to_fractional(a);
    const auto [sb, tb] = basis.to_fractional(b);
    if (std::abs(sa - sb) > tol) {
        return sa < sb;
    }
    return ta < tb - tol;
}

cplx newton_step(const GreenEvaluation& e) {
    const Sym2& h = e.hessian;
    const double det = h.xx * h.yy - h.xy * h.xy;
    if (det == 0.0) {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    return {-(h.yy * e.gradient.x - h.xy * e.gradient.y) / det, -(h.xx * e.gradient.y - h.xy * e.gradient.x) / det};
}

// Undamped Newton from an accepted point, keeping the iterate with the shortest
// step. Returns that step length.
double polish(const GreenFunction& green, SeedResult& r, GreenEvaluation e) {
    cplx z = r.z;
    double best = std::abs(newton_step(e));
    int stale = 0;
    for (int k = 0; k < 40 && stale < 4 && std::isfinite(best) && best > 0.0; ++k) {
        z += newton_step(e);
        try {
            e = green.evaluate(z);
        } catch (const SingularityError&) {
            break;
        }
        const double step = std::abs(newton_step(e));
        if (!std::isfinite(step)) {
            break;
        }
        if (step < best) {
            best = step;
            r.z = z;
            r.gradient_norm = e.gradient.norm();
            stale = 0;
        } else {
            ++stale;
        }
    }
    return best;
}

// How far rounding noise in the gradient can move a critical point: the gradient
// is resolved to about 1e-15 / |r1|, divided by the smallest Hessian eigenvalue.
// On very thin tori G is flat to ~1e-14 along the short direction and this
// reaches 1e-4.
double noise_radius(const GreenFunction& green, cplx z) {
    const auto [lo, hi] = green.hessian(z).eigenvalues();
    const double weakest = std::min(std::abs(lo), std::abs(hi));
    return 1e-15 / std::abs(green.basis().reduced1()) / weakest;
}

SeedResult refine_seed(const GreenFunction& green, cplx seed, const CensusOptions& opt) {
    const LatticeBasis& basis = green.basis();
    const double box = 2.0 / opt.grid_n;
    cplx z = seed;
    SeedResult out;
    try {
        for (int it = 0; it <= opt.max_iterations; ++it) {
            const GreenEvaluation e = green.evaluate(z);
            const double gn = e.gradient.norm();
            if (!std::isfinite(gn)) {
                out.status = SeedResult::Status::left_cell;
                return out;
            }
            if (gn < opt.newton_tol) {
                out.z = z;
                out.gradient_norm = gn;
                const double step = polish(green, out, e);
                const auto [ps, pt] = basis.to_reduced_fractional(out.z - seed);
                if (!(std::abs(ps) < box && std::abs(pt) < box)) {
                    out.status = SeedResult::Status::left_cell;
                    return out;
                }
                const double noise = noise_radius(green, out.z);
                out.uncertainty = std::max(step, noise);
                out.status = step <= 10.0 * std::max(opt.dedup_tol, noise) ? SeedResult::Status::accepted
                                                                          : SeedResult::Status::not_converged;
                return out;
            }
            if (it == opt.max_iterations) {
                break;
            }
            // (H^T H + lambda I) d = -H^T g with lambda relative to |H|_F^2; H symmetric
            const Sym2& h = e.hessian;
            const double lambda = opt.damping * (h.xx * h.xx + 2.0 * h.xy * h.xy + h.yy * h.yy);
            const double a = h.xx * h.xx + h.xy * h.xy + lambda;
            const double b = h.xx * h.xy + h.xy * h.yy;
            const double c = h.xy * h.xy + h.yy * h.yy + lambda;
            const double rx = -(h.xx * e.gradient.x + h.xy * e.gradient.y);
            const double ry = -(h.xy * e.gradient.x + h.yy * e.gradient.y);
            const double det = a * c - b * b;
            const cplx step((c * rx - b * ry) / det, (a * ry - b * rx) / det);
            z += step;
            const auto [ds, dt] = basis.to_reduced_fractional(z - seed);
            if (!(std::abs(ds) < box && std::abs(dt) < box)) {
                out.status = SeedResult::Status::left_cell;
                return out;
            }
        }
    } catch (const SingularityError&) {
        out.status = SeedResult::Status::left_cell;
        return out;
    }
    out.status = SeedResult::Status::not_converged;
    return out;
}

// Total rotation of grad G along the segment a -> b, refined until consecutive
// samples differ by less than pi/3.
double edge_rotation(const GreenFunction& green, cplx a, cplx b, double angle_a, double angle_b,
                     int depth) {
    const double d = wrap_angle(angle_b - angle_a);
    if (std::abs(d) < pi / 3.0 || depth >= 14) {
        return d;
    }
    const cplx mid = 0.5 * (a + b);
    const Vec2 g = green.gradient(mid);
    const double angle_mid = std::atan2(g.y, g.x);
    return edge_rotation(green, a, mid, angle_a, angle_mid, depth + 1) +
           edge_rotation(green, mid, b, angle_mid, angle_b, depth + 1);
}

// Winding number of grad G around a small square centred at z.
int local_index(const GreenFunction& green, cplx z, double half_width) {
    const std::array<cplx, 4> corners{z + cplx(half_width, half_width), z + cplx(-half_width, half_width),
                                      z + cplx(-half_width, -half_width), z + cplx(half_width, -half_width)};
    std::array<double, 4> angles{};
    for (int k = 0; k < 4; ++k) {
        const Vec2 g = green.gradient(corners[k]);
        angles[k] = std::atan2(g.y, g.x);
    }
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        total += edge_rotation(green, corners[k], corners[(k + 1) % 4], angles[k], angles[(k + 1) % 4], 0);
    }
    return static_cast<int>(std::lround(total / (2.0 * pi)));
}

}  // namespace

std::string to_string(PointKind kind) {
    return kind == PointKind::half_period ? "half_period" : "extra_pair_member";
}

std::string to_string(MorseType type) {
    switch (type) {
        case MorseType::min:
            return "min";
        case MorseType::max:
            return "max";
        case MorseType::saddle:
            return "saddle";
        case MorseType::degenerate:
            return "degenerate";
    }
    return "degenerate";
}

const CriticalPoint* CriticalCensus::extra() const {
    for (const auto& p : points) {
        if (p.kind == PointKind::extra_pair_member) {
            return &p;
        }
    }
    return nullptr;
}

MorseType classify_hessian(const Sym2& hessian) {
    const auto [lo, hi] = hessian.eigenvalues();
    if (std::abs(lo) < 1e-8 || std::abs(hi) < 1e-8) {
        return MorseType::degenerate;
    }
    if (lo > 0.0) {
        return MorseType::min;
    }
    if (hi < 0.0) {
        return MorseType::max;
    }
    return MorseType::saddle;
}

MorseType classify_critical_point(cplx x, const GreenFunction& green) {
    return classify_hessian(green.hessian(x));
}

bool is_four_torsion(cplx x, const LatticeBasis& basis, double tol) {
    const auto [s, t] = basis.to_fractional(x);
    const double m = std::round(4.0 * s);
    const double n = std::round(4.0 * t);
    const auto im = static_cast<long long>(m);
    const auto in = static_cast<long long>(n);
    if (im % 2 == 0 && in % 2 == 0) {
        return false;  // 2y in the lattice
    }
    const cplx y = basis.from_fractional(m / 4.0, n / 4.0);
    return torus_distance(x, y, basis) < tol;
}

WindingCensus winding_census(const GreenFunction& green, int grid_n, Exec exec) {
    const LatticeBasis& basis = green.basis();
    const cplx u = basis.reduced1();
    const cplx v = basis.reduced2();
    const int n = grid_n;
    const double os = 0.3183098861837907;  // offsets keep half-periods off the edges
    const double ot = 0.2718281828459045;
    auto node = [&](int i, int j) {
        return ((i + os) / n) * u + ((j + ot) / n) * v;
    };

    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const auto angles = map_indices<double>(exec, nn, [&](std::size_t k) {
        const int i = static_cast<int>(k) / n;
        const int j = static_cast<int>(k) % n;
        const Vec2 g = green.gradient(node(i, j));
        return std::atan2(g.y, g.x);
    });
    auto angle = [&](int i, int j) {
        return angles[static_cast<std::size_t>((i % n + n) % n) * n + static_cast<std::size_t>((j % n + n) % n)];
    };
    // horizontal edge (i,j)->(i+1,j) and vertical edge (i,j)->(i,j+1)
    const auto horiz = map_indices<double>(exec, nn, [&](std::size_t k) {
        const int i = static_cast<int>(k) / n;
        const int j = static_cast<int>(k) % n;
        return edge_rotation(green, node(i, j), node(i + 1, j), angle(i, j), angle(i + 1, j), 0);
    });
    const auto vert = map_indices<double>(exec, nn, [&](std::size_t k) {
        const int i = static_cast<int>(k) / n;
        const int j = static_cast<int>(k) % n;
        return edge_rotation(green, node(i, j), node(i, j + 1), angle(i, j), angle(i, j + 1), 0);
    });
    auto edge = [&](const std::vector<double>& e, int i, int j) {
        return e[static_cast<std::size_t>((i % n + n) % n) * n + static_cast<std::size_t>((j % n + n) % n)];
    };

    const double cell_diam = std::max(std::abs(u + v), std::abs(u - v)) / n;
    const double exclusion = 0.05 * std::abs(u) + cell_diam;
    WindingCensus out;
    out.grid_n = n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const cplx center = 0.5 * (node(i, j) + node(i + 1, j + 1));
            if (std::abs(nearest_image(center, basis)) < exclusion) {
                continue;
            }
            const double total = edge(horiz, i, j) + edge(vert, i + 1, j) - edge(horiz, i, j + 1) - edge(vert, i, j);
            const int index = static_cast<int>(std::lround(total / (2.0 * pi)));
            if (index != 0) {
                out.cells.push_back({reduce_to_fundamental(center, basis).z, index});
                out.index_sum += index;
                ++out.nonzero_cells;
            }
        }
    }
    return out;
}

CriticalCensus find_critical_points(const GreenFunction& green, const CensusOptions& opt) {
    if (opt.grid_n < 32) {
        throw ResolutionError("census grid_n must be at least 32");
    }
    if (!(opt.newton_tol <= 1e-8)) {
        throw ResolutionError("census newton_tol must be at most 1e-8");
    }
    const LatticeBasis& basis = green.basis();
    const cplx u = basis.reduced1();
    const cplx v = basis.reduced2();
    const int n = opt.grid_n;
    const double exclusion = 0.05 * std::abs(u);

    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const auto results = map_indices<SeedResult>(opt.exec, nn, [&](std::size_t k) {
        const int i = static_cast<int>(k) / n;
        const int j = static_cast<int>(k) % n;
        const cplx seed = (static_cast<double>(i) / n) * u + (static_cast<double>(j) / n) * v;
        if (std::abs(nearest_image(seed, basis)) < exclusion) {
            return SeedResult{};
        }
        return refine_seed(green, seed, opt);
    });

    CriticalCensus census;
    struct Cluster {
        cplx z;
        double uncertainty;
    };
    std::vector<Cluster> clusters;
    for (const SeedResult& r : results) {
        switch (r.status) {
            case SeedResult::Status::excluded:
                continue;
            case SeedResult::Status::left_cell:
                ++census.left_cell;
                break;
            case SeedResult::Status::not_converged:
                ++census.not_converged;
                break;
            case SeedResult::Status::accepted: {
                ++census.accepted;
                const cplx z = reduce_to_fundamental(r.z, basis).z;
                auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
                    return torus_distance(c.z, z, basis) < opt.dedup_tol + c.uncertainty + r.uncertainty;
                });
                if (it == clusters.end()) {
                    clusters.push_back({z, r.uncertainty});
                } else if (r.uncertainty < it->uncertainty) {
                    *it = {z, r.uncertainty};
                }
                break;
            }
        }
        ++census.seeds;
    }
    if (census.not_converged * 2 > census.seeds) {
        std::ostringstream msg;
        msg << census.not_converged << " of " << census.seeds
            << " Newton seeds failed to converge; increase grid_n";
        throw ResolutionError(msg.str());
    }

    auto make_point = [&](cplx z, PointKind kind) {
        const GreenEvaluation e = green.evaluate(z);
        return CriticalPoint{TorusPoint{z}, kind, classify_hessian(e.hessian), e.gradient.norm(), e.hessian};
    };

    std::vector<Cluster> extras;
    std::array<bool, 3> seen{false, false, false};
    const auto hps = half_periods(basis);
    for (const Cluster& c : clusters) {
        bool is_hp = false;
        for (int k = 0; k < 3; ++k) {
            if (torus_distance(c.z, hps[k].z, basis) < opt.dedup_tol + c.uncertainty) {
                seen[k] = true;
                is_hp = true;
            }
        }
        if (!is_hp) {
            extras.push_back(c);
        }
    }
    for (int k = 0; k < 3; ++k) {
        if (!seen[k]) {
            throw ResolutionError("half-period omega_" + std::to_string(k + 1) +
                                  "/2 not recovered by the census; increase grid_n");
        }
        census.points.push_back(make_point(hps[k].z, PointKind::half_period));
    }

    if (extras.size() == 2 &&
        torus_distance(extras[0].z, reduce_to_fundamental(-extras[1].z, basis).z, basis) <
            opt.dedup_tol + extras[0].uncertainty + extras[1].uncertainty) {
        const double unc = std::max(extras[0].uncertainty, extras[1].uncertainty);
        const double frac_tol = std::max(1e-9, 10.0 * unc * basis.max_period() / basis.area());
        cplx a = edge_normalized(extras[0].uncertainty <= extras[1].uncertainty ? extras[0].z : -extras[1].z,
                                 basis, frac_tol);
        cplx b = edge_normalized(-a, basis, frac_tol);
        if (canonical_less(b, a, basis, frac_tol)) {
            std::swap(a, b);
        }
        census.points.push_back(make_point(a, PointKind::extra_pair_member));
        census.points.push_back(make_point(b, PointKind::extra_pair_member));
    } else if (!extras.empty()) {
        std::ostringstream msg;
        msg << "critical point census found " << (3 + extras.size())
            << " points, which is neither 3 nor 5; extra points:";
        for (const Cluster& c : extras) {
            msg << " (" << c.z.real() << ", " << c.z.imag() << ")";
        }
        throw InternalError(msg.str());
    }
    census.count = static_cast<int>(census.points.size());

    census.oracle = winding_census(green, n, opt.exec);
    int census_index = 0;
    const double cell_diam = std::max(std::abs(u + v), std::abs(u - v)) / n;
    for (const auto& p : census.points) {
        census_index += p.morse == MorseType::degenerate ? local_index(green, p.point.z, cell_diam)
                                                         : morse_index(p.morse);
    }
    bool cells_explained = true;
    for (const auto& cell : census.oracle.cells) {
        const bool hit = std::any_of(census.points.begin(), census.points.end(), [&](const CriticalPoint& p) {
            return torus_distance(p.point.z, cell.center, basis) <= cell_diam;
        });
        cells_explained = cells_explained && hit;
    }
    if (census_index != census.oracle.index_sum || !cells_explained) {
        std::ostringstream msg;
        msg << "winding oracle disagrees with Newton census (census index " << census_index
            << ", oracle index " << census.oracle.index_sum << ", oracle cells "
            << census.oracle.nonzero_cells << ", census count " << census.count << "); increase grid_n";
        throw ResolutionError(msg.str());
    }
    return census;
}

CriticalCensus find_critical_points(const LatticeBasis& basis, int grid_n, double newton_tol) {
    CensusOptions opt;
    opt.grid_n = grid_n;
    opt.newton_tol = newton_tol;
    return find_critical_points(GreenFunction(basis), opt);
}

}  // namespace tg
