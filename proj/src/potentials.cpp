#include "tg/potentials.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tg/error.hpp"

namespace tg {
namespace {

constexpr double pi = std::numbers::pi;

void check_component(int component) {
    if (component != 1 && component != 2) {
        throw ConfigError("component index must be 1 or 2, got " + std::to_string(component));
    }
}

void check_index(std::size_t j, std::size_t k) {
    if (j >= k) {
        throw ConfigError("blow-up point index " + std::to_string(j) + " out of range (k = " + std::to_string(k) + ")");
    }
}

std::array<double, 2> wrapped_fractional(cplx z, const LatticeBasis& basis) {
    auto [s, t] = basis.to_fractional(z);
    s -= std::floor(s);
    t -= std::floor(t);
    return {s >= 1.0 ? 0.0 : s, t >= 1.0 ? 0.0 : t};
}

bool patches_contain(const std::vector<Patch>& patches, double s, double t) {
    for (const Patch& p : patches) {
        if (p.contains(s, t)) {
            return true;
        }
    }
    return false;
}

}  // namespace

const std::vector<TorusPoint>& VortexConfig::points(int component) const {
    check_component(component);
    return component == 1 ? p1 : p2;
}

int PartitionSpec::cell_of(cplx z, const LatticeBasis& basis) const {
    const auto [s, t] = wrapped_fractional(z, basis);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (patches_contain(cells[c].patches, s, t)) {
            return static_cast<int>(c);
        }
    }
    return -1;
}

const PartitionCell& PartitionSpec::cell_for(int q_index) const {
    for (const PartitionCell& c : cells) {
        if (c.q_index == q_index) {
            return c;
        }
    }
    throw ConfigError("partition has no cell for blow-up point " + std::to_string(q_index));
}

PartitionSpec PartitionSpec::whole_torus(double delta) {
    PartitionSpec spec;
    spec.cells.push_back(PartitionCell{{Patch{}}, 0});
    spec.delta = delta;
    return spec;
}

double BlowupConfig::mass(int component, std::size_t j) const {
    check_component(component);
    if (masses.empty()) {
        return default_mass;
    }
    check_index(j, masses.size());
    return masses[j][static_cast<std::size_t>(component - 1)];
}

void validate(const BlowupConfig& blowup, const VortexConfig& vortices, const LatticeBasis& basis) {
    const std::size_t k = blowup.k();
    const PartitionSpec& part = blowup.partition;
    if (k == 0) {
        throw ConfigError("blow-up configuration has no points");
    }
    if (!blowup.masses.empty() && blowup.masses.size() != k) {
        throw ConfigError("masses must list one pair per blow-up point");
    }
    for (const auto& m : blowup.masses) {
        if (!(m[0] > 0.0 && m[1] > 0.0)) {
            throw ConfigError("masses must be positive");
        }
    }
    if (!(part.delta > 0.0)) {
        throw ConfigError("partition delta must be positive");
    }
    const double tol = basis.point_tolerance();
    for (std::size_t j = 0; j < k; ++j) {
        for (int c = 1; c <= 2; ++c) {
            for (const TorusPoint& p : vortices.points(c)) {
                if (torus_distance(blowup.q[j].z, p.z, basis) < tol) {
                    throw ConfigError("blow-up point q[" + std::to_string(j) + "] coincides with a vortex of component " +
                                      std::to_string(c));
                }
            }
        }
        for (std::size_t l = j + 1; l < k; ++l) {
            if (!(torus_distance(blowup.q[j].z, blowup.q[l].z, basis) > 2.0 * part.delta)) {
                throw ConfigError("blow-up points q[" + std::to_string(j) + "] and q[" + std::to_string(l) +
                                  "] are closer than 2 delta");
            }
        }
    }

    if (part.cells.size() != k) {
        throw ConfigError("partition must have exactly one cell per blow-up point");
    }
    std::vector<bool> claimed(k, false);
    double area = 0.0;
    for (const PartitionCell& cell : part.cells) {
        if (cell.q_index < 0 || static_cast<std::size_t>(cell.q_index) >= k ||
            claimed[static_cast<std::size_t>(cell.q_index)]) {
            throw ConfigError("partition cells must map one-to-one onto blow-up points");
        }
        claimed[static_cast<std::size_t>(cell.q_index)] = true;
        if (cell.patches.empty()) {
            throw ConfigError("partition cell for q[" + std::to_string(cell.q_index) + "] has no patches");
        }
        for (const Patch& p : cell.patches) {
            if (!(0.0 <= p.s0 && p.s0 < p.s1 && p.s1 <= 1.0 && 0.0 <= p.t0 && p.t0 < p.t1 && p.t1 <= 1.0)) {
                throw ConfigError("partition patch must satisfy 0 <= s0 < s1 <= 1 and 0 <= t0 < t1 <= 1");
            }
            area += p.fractional_area();
        }
    }
    if (std::abs(area - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "partition patches cover fractional area " << area << ", expected 1";
        throw ConfigError(msg.str());
    }

    constexpr int grid = 512;
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            const double s = (a + 0.5) / grid;
            const double t = (b + 0.5) / grid;
            int hits = 0;
            for (const PartitionCell& cell : part.cells) {
                for (const Patch& p : cell.patches) {
                    hits += p.contains(s, t) ? 1 : 0;
                }
            }
            if (hits != 1) {
                std::ostringstream msg;
                msg << "partition patches " << (hits == 0 ? "leave a gap" : "overlap") << " at fractional point (" << s
                    << ", " << t << ")";
                throw ConfigError(msg.str());
            }
        }
    }

    // Closed ball slightly enlarged, sampled on rings.
    const double radius = part.delta * (1.0 + 1e-6);
    for (std::size_t j = 0; j < k; ++j) {
        const std::vector<Patch>& patches = part.cell_for(static_cast<int>(j)).patches;
        const cplx q = blowup.q[j].z;
        for (int ring = 0; ring <= 16; ++ring) {
            const double r = radius * ring / 16.0;
            const int n_angle = ring == 0 ? 1 : 256;
            for (int m = 0; m < n_angle; ++m) {
                const cplx z = q + std::polar(r, 2.0 * pi * m / n_angle);
                const auto [s, t] = wrapped_fractional(z, basis);
                if (!patches_contain(patches, s, t)) {
                    throw ConfigError("ball of radius delta around q[" + std::to_string(j) +
                                      "] is not contained in its partition cell");
                }
            }
        }
    }
}

double background(int component, cplx x, const VortexConfig& vortices, const GreenFunction& green) {
    double sum = 0.0;
    for (const TorusPoint& p : vortices.points(component)) {
        sum += green.value(x - p.z);
    }
    return -4.0 * pi * sum;
}

Vec2 background_gradient(int component, cplx x, const VortexConfig& vortices, const GreenFunction& green) {
    Vec2 sum;
    for (const TorusPoint& p : vortices.points(component)) {
        sum += green.gradient(x - p.z);
    }
    return -4.0 * pi * sum;
}

Sym2 background_hessian(int component, cplx x, const VortexConfig& vortices, const GreenFunction& green) {
    Sym2 sum;
    for (const TorusPoint& p : vortices.points(component)) {
        sum += green.hessian(x - p.z);
    }
    return -4.0 * pi * sum;
}

double interaction_energy(int component, std::span<const TorusPoint> q, const VortexConfig& vortices,
                          const GreenFunction& green) {
    double sum = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        sum += background(component, q[j].z, vortices, green);
        for (std::size_t l = j + 1; l < q.size(); ++l) {
            sum += 8.0 * pi * green.value(q[j].z - q[l].z);
        }
    }
    return sum;
}

Vec2 interaction_energy_gradient(int component, std::size_t j, std::span<const TorusPoint> q,
                                 const VortexConfig& vortices, const GreenFunction& green) {
    check_index(j, q.size());
    Vec2 g = background_gradient(component, q[j].z, vortices, green);
    for (std::size_t l = 0; l < q.size(); ++l) {
        if (l != j) {
            g += 8.0 * pi * green.gradient(q[j].z - q[l].z);
        }
    }
    return g;
}

double local_deviation(cplx x, int component, std::size_t j, const BlowupConfig& blowup,
                       const VortexConfig& vortices, const GreenFunction& green) {
    check_index(j, blowup.k());
    const cplx qj = blowup.q[j].z;
    double f = blowup.mass(component, j) * (green.regular(x - qj) - green.robin());
    for (std::size_t l = 0; l < blowup.k(); ++l) {
        if (l != j) {
            const cplx ql = blowup.q[l].z;
            f += blowup.mass(component, l) * (green.value(x - ql) - green.value(qj - ql));
        }
    }
    return f + background(component, x, vortices, green) - background(component, qj, vortices, green);
}

Vec2 local_deviation_gradient(cplx x, int component, std::size_t j, const BlowupConfig& blowup,
                              const VortexConfig& vortices, const GreenFunction& green) {
    check_index(j, blowup.k());
    Vec2 g = blowup.mass(component, j) * green.regular_gradient(x - blowup.q[j].z);
    for (std::size_t l = 0; l < blowup.k(); ++l) {
        if (l != j) {
            g += blowup.mass(component, l) * green.gradient(x - blowup.q[l].z);
        }
    }
    return g + background_gradient(component, x, vortices, green);
}

double bubble_log_weight_reduced(std::size_t j, std::span<const TorusPoint> q, const GreenFunction& green) {
    check_index(j, q.size());
    double e = green.robin();
    for (std::size_t l = 0; l < q.size(); ++l) {
        if (l != j) {
            e += green.value(q[j].z - q[l].z);
        }
    }
    return 8.0 * pi * e;
}

double bubble_weight(int component, std::size_t j, const BlowupConfig& blowup, const VortexConfig& vortices,
                     const GreenFunction& green) {
    return std::exp(bubble_log_weight_reduced(j, blowup.q, green) +
                    background(component, blowup.q[j].z, vortices, green));
}

std::vector<Vec2> pohozaev_residual(std::span<const TorusPoint> q, std::span<const std::array<double, 2>> masses,
                                    const VortexConfig& vortices, const GreenFunction& green) {
    if (masses.size() != q.size()) {
        throw ConfigError("pohozaev_residual needs one mass pair per blow-up point");
    }
    std::vector<Vec2> out;
    out.reserve(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        Vec2 pull1;  // sum_l m_1l dG
        Vec2 pull2;
        for (std::size_t l = 0; l < q.size(); ++l) {
            if (l != j) {
                const Vec2 dg = green.gradient(q[j].z - q[l].z);
                pull1 += masses[l][0] * dg;
                pull2 += masses[l][1] * dg;
            }
        }
        const Vec2 du1 = background_gradient(1, q[j].z, vortices, green);
        const Vec2 du2 = background_gradient(2, q[j].z, vortices, green);
        out.push_back(masses[j][0] * (du2 + pull2) + masses[j][1] * (du1 + pull1));
    }
    return out;
}

double condition1_residual(std::span<const TorusPoint> q, const VortexConfig& vortices, const GreenFunction& green) {
    std::vector<double> diff;
    diff.reserve(q.size());
    for (const TorusPoint& p : q) {
        diff.push_back(background(1, p.z, vortices, green) - background(2, p.z, vortices, green));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        for (std::size_t j = i + 1; j < diff.size(); ++j) {
            worst = std::max(worst, std::abs(diff[i] - diff[j]));
        }
    }
    return worst;
}

std::vector<double> predict_height(std::span<const TorusPoint> q, const GreenFunction& green,
                                   std::span<const double> tail_constants, double mean_u, double epsilon) {
    if (tail_constants.size() != q.size()) {
        throw ConfigError("predict_height needs one tail constant per blow-up point");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("predict_height needs epsilon > 0");
    }
    std::vector<double> beta;
    beta.reserve(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double minus_beta =
            bubble_log_weight_reduced(j, q, green) - tail_constants[j] - 4.0 * std::log(epsilon) + mean_u;
        beta.push_back(-minus_beta);
    }
    return beta;
}

}  // namespace tg
