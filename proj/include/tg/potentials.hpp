#pragma once

#include <array>
#include <span>
#include <vector>

#include "tg/green.hpp"

namespace tg {

/// Vortex points of the two components; a point listed m times has multiplicity m.
struct VortexConfig {
    std::vector<TorusPoint> p1;
    std::vector<TorusPoint> p2;

    /// component is 1 or 2.
    const std::vector<TorusPoint>& points(int component) const;
};

/// Closed-open rectangle [s0, s1) x [t0, t1) in the fractional coordinates of the
/// user basis, i.e. a parallelogram patch of the torus.
struct Patch {
    double s0 = 0.0;
    double s1 = 1.0;
    double t0 = 0.0;
    double t1 = 1.0;

    double fractional_area() const { return (s1 - s0) * (t1 - t0); }
    bool contains(double s, double t) const { return s >= s0 && s < s1 && t >= t0 && t < t1; }
};

struct PartitionCell {
    std::vector<Patch> patches;
    int q_index = 0;
};

/// Cells Omega_j, one per blow-up point, and the radius of the excised balls.
struct PartitionSpec {
    std::vector<PartitionCell> cells;
    double delta = 0.0;

    /// Index of the cell containing z (mod lattice), or -1.
    int cell_of(cplx z, const LatticeBasis& basis) const;
    const PartitionCell& cell_for(int q_index) const;

    /// A single cell covering the whole torus, for k = 1.
    static PartitionSpec whole_torus(double delta);
};

inline constexpr double default_mass = 8.0 * 3.14159265358979323846;

struct BlowupConfig {
    std::vector<TorusPoint> q;
    /// masses[j] = {m_1j, m_2j}; empty means 8 pi everywhere.
    std::vector<std::array<double, 2>> masses;
    PartitionSpec partition;

    std::size_t k() const { return q.size(); }
    double mass(int component, std::size_t j) const;
};

/// Checks the blow-up points (off the vortex set, pairwise further apart than
/// 2 delta) and the partition: disjoint cells on a 512x512 sample grid, patch
/// areas summing to |Omega| within 1e-9, and B_delta(q_j) inside Omega_j.
/// Throws ConfigError naming the violated condition.
void validate(const BlowupConfig& blowup, const VortexConfig& vortices, const LatticeBasis& basis);

/// u_{0,i}(x) = -4 pi sum_l G(x - p_{i,l}).
double background(int component, cplx x, const VortexConfig& vortices, const GreenFunction& green);
Vec2 background_gradient(int component, cplx x, const VortexConfig& vortices, const GreenFunction& green);
Sym2 background_hessian(int component, cplx x, const VortexConfig& vortices, const GreenFunction& green);

/// sum_j u_{0,i}(q_j) + 8 pi sum_{j<l} G(q_j - q_l).
double interaction_energy(int component, std::span<const TorusPoint> q, const VortexConfig& vortices,
                          const GreenFunction& green);
/// Gradient of interaction_energy with respect to q_j.
Vec2 interaction_energy_gradient(int component, std::size_t j, std::span<const TorusPoint> q,
                                 const VortexConfig& vortices, const GreenFunction& green);

/// Local deviation f_{i,j}(x) around q_j, masses from the blow-up config:
///   m_ij (gamma(x - q_j) - gamma(0)) + sum_{l != j} m_il (G(x - q_l) - G(q_j - q_l)) + u_{0,i}(x) - u_{0,i}(q_j).
double local_deviation(cplx x, int component, std::size_t j, const BlowupConfig& blowup,
                       const VortexConfig& vortices, const GreenFunction& green);
Vec2 local_deviation_gradient(cplx x, int component, std::size_t j, const BlowupConfig& blowup,
                              const VortexConfig& vortices, const GreenFunction& green);

/// exp(8 pi (gamma(0) + sum_{l != j} G(q_j - q_l)) + u_{0,i}(q_j)).
double bubble_weight(int component, std::size_t j, const BlowupConfig& blowup, const VortexConfig& vortices,
                     const GreenFunction& green);
/// The exponent of bubble_weight without u_{0,i}(q_j); bubble_weight / e^{u_{0,i}(q_j)} = exp of this.
double bubble_log_weight_reduced(std::size_t j, std::span<const TorusPoint> q, const GreenFunction& green);

/// Per blow-up point j, the vector (h = 1, 2) of the location identity
///   m_1j (d_h u_{0,2}(q_j) + sum_{l != j} m_2l d_h G(q_j - q_l))
/// + m_2j (d_h u_{0,1}(q_j) + sum_{l != j} m_1l d_h G(q_j - q_l)).
std::vector<Vec2> pohozaev_residual(std::span<const TorusPoint> q, std::span<const std::array<double, 2>> masses,
                                    const VortexConfig& vortices, const GreenFunction& green);

/// max over pairs |(u_{0,1} - u_{0,2})(q_i) - (u_{0,1} - u_{0,2})(q_j)|.
double condition1_residual(std::span<const TorusPoint> q, const VortexConfig& vortices, const GreenFunction& green);

/// Bubble heights beta_j predicted from component i's tail constants I_{i,j}:
///   -beta_j = 8 pi gamma(0) + 8 pi sum_{l != j} G(q_j - q_l) - I_{i,j} - 4 ln(epsilon) + mean_u.
std::vector<double> predict_height(std::span<const TorusPoint> q, const GreenFunction& green,
                                   std::span<const double> tail_constants, double mean_u, double epsilon);

}  // namespace tg
