#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tg/census.hpp"
#include "tg/potentials.hpp"

namespace tg {

/// Controls for the principal-value quadrature of the singular functionals.
///
/// Around the singular point the integral is taken on polar rings, one per octave
/// of radius, with `angular_nodes` equally spaced angles and `radial_nodes` Gauss
/// points per ring. Because the exponent is harmonic with a critical point at the
/// centre, its quadratic part has zero mean on any node set whose size is a multiple
/// of 4, so the 1/r^2 divergence cancels exactly. The remaining O(delta^2) error is
/// removed by Richardson extrapolation over `delta_sequence`.
struct SingularQuadratureSettings {
    std::vector<double> delta_sequence;  // empty: delta0 * 2^{-m}, m < delta_levels, delta0 = ball radius / 2
    int delta_levels = 4;  // deepened by two (up to 8) when the default sequence does not converge
    int angular_nodes = 64;
    int radial_nodes = 12;
    int outer_nodes = 24;     // Gauss points per panel in the polar region around the ball
    int outer_panels = 4;     // panels per edge sector (angle) and in log-radius
    double outer_cutoff = 0.0;  // R of the exterior-integral route; 0 means 6 diam(Omega)
    double patch_tolerance = 1e-12;  // adaptive patch quadrature, relative to pi / rho^2
    bool refine_check = true;        // add a resolution-doubling pass to the error estimate
    Exec exec = Exec::parallel;

    /// Throws ConfigError unless angular_nodes is a positive multiple of 4, the delta
    /// sequence is positive and strictly decreasing, and node counts are positive.
    void validate() const;
    /// All node counts doubled.
    SingularQuadratureSettings refined() const;
};

struct RingContribution {
    double r_inner;
    double r_outer;
    double value;
};

/// D(q) = e^{-8 pi G(q)} [ PV int_Omega (e^{h} - 1) / |z - q|^4 - int_{R^2 \ Omega} |z - q|^{-4} ]
/// with h(z) = 8 pi (gamma(z, q) - gamma(q, q) + G(q) - G(z)).
struct DFunctionalResult {
    double value = 0.0;
    double error = 0.0;
    double bracket = 0.0;  // the square-bracket term, value * e^{8 pi G(q)}
    double bracket_error = 0.0;
    double exponent_gradient = 0.0;  // |grad h(q)| = 8 pi |grad G(q)|
    double ball_radius = 0.0;
    std::vector<RingContribution> rings;
    std::vector<std::string> warnings;
};

/// Throws QuadratureError when the error estimate exceeds 1e-4 of the larger of |value|
/// and the cancellation scale e^{-8 pi G(q)} * pi / rho^2 * 1e-6.
DFunctionalResult d_functional(cplx q, const GreenFunction& green, const SingularQuadratureSettings& settings = {});

enum class WeightDenominator {
    per_point,    // rho_{i,j} / e^{u_{0,i}(q_j)}
    first_point,  // rho_{i,j} / e^{u_{0,i}(q_1)}, the literal reading
};

struct D2Term {
    std::size_t j;
    int component;
    double weight;
    double bracket;
    double error;
};

struct D2Result {
    double value = 0.0;
    double error = 0.0;
    std::vector<D2Term> terms;
    std::vector<std::string> warnings;
};

/// sum_j sum_i w_{i,j} [ PV int_{Omega_j} (e^{f_{i,j}} - 1) / |x - q_j|^4 - int_{R^2 \ Omega_j} |x - q_j|^{-4} ].
/// Requires all masses 8 pi; validates the configuration first.
D2Result d2_functional(const BlowupConfig& blowup, const VortexConfig& vortices, const GreenFunction& green,
                       const SingularQuadratureSettings& settings = {},
                       WeightDenominator denominator = WeightDenominator::per_point);

/// Two-vortex decomposition for k = 1 with p1 and p2 each doubled:
///   literal = D(q - p1) e^{8 pi G(q - p1)} + D(q - p2) e^{8 pi G(q - p2)}.
/// `value` carries the factor e^{8 pi gamma(q, q)} that the general evaluator's weight
/// rho_{i,1} / e^{u_{0,i}(q)} contributes, so it is directly comparable to d2_functional.
struct ClosedD2Result {
    double value = 0.0;
    double error = 0.0;
    double literal = 0.0;
    double literal_error = 0.0;
    DFunctionalResult first;
    DFunctionalResult second;
    std::vector<std::string> warnings;
};
ClosedD2Result d2_two_vortex_closed(cplx q, cplx p1, cplx p2, const GreenFunction& green,
                                    const SingularQuadratureSettings& settings = {});

enum class SignBand { negative, zero_within_tol, positive };
std::string to_string(SignBand band);

struct AdmissibilityReport {
    struct PointValue {
        std::string label;  // "half_period_1".."half_period_3", "extra_1", "extra_2"
        cplx point;
        double value;
        double error;
    };
    int census_count = 0;
    std::vector<PointValue> d_values;

    std::optional<D2Result> d2;  // empty when the quadrature failed
    double cond1 = 0.0;
    std::vector<std::array<Vec2, 2>> cond2;  // per j: grad_{q_j} of both interaction energies
    double cond2_max = 0.0;
    std::optional<SignBand> cond3_sign;

    bool cond1_pass = false;
    bool cond2_pass = false;
    bool cond3_pass = false;
    bool verdict_pass = false;
    std::vector<std::string> warnings;
};

inline constexpr double condition_tolerance = 1e-6;

/// Conditions (1)-(3) for the blow-up set, plus D at every census point of the torus.
/// Zero band for D^2 is max(1e-8, 3 * error).
AdmissibilityReport necessary_conditions_report(const BlowupConfig& blowup, const VortexConfig& vortices,
                                                const GreenFunction& green,
                                                const SingularQuadratureSettings& settings = {});

/// Two doubled vortices a half period apart: p1 twice in component 1, p2 = p1 + omega_k/2
/// twice in component 2, one blow-up point. Condition (2) holds at q exactly when q - p1
/// and q - p2 are both critical points of G, so the candidates are the census points c
/// with c - omega_k/2 also in the census, q = p1 + c.
struct PairedVortexCandidate {
    cplx offset;  // c = q - p1
    cplx q;
    bool offset_is_extra = false;
    AdmissibilityReport report;
};

struct PairedVortexStudy {
    int translate = 1;  // k
    cplx p1;
    cplx p2;
    CriticalCensus census;
    std::vector<PairedVortexCandidate> candidates;
    /// Per extra critical point: whether it is a four-torsion point (it never should be).
    std::vector<bool> extra_four_torsion;
    /// No candidate offset is an extra critical point.
    bool extra_pair_excluded = true;
};

/// translate is 1, 2 or 3 (omega1, omega2, omega1 + omega2, reduced). The ball radius of
/// each candidate's partition is a quarter of its distance to the vortices.
PairedVortexStudy paired_vortex_study(const GreenFunction& green, cplx p1, int translate,
                                      const SingularQuadratureSettings& settings = {});

/// int_{R^2 \ P} |z - q|^{-4} for the parallelogram P = q + [-1/2, 1/2) r1 + [-1/2, 1/2) r2 on the
/// reduced basis, two routes: the analytic tail pi / R^2 plus polar quadrature on B_R \ P, and
/// pi / rho^2 minus polar quadrature on P \ B_rho.
struct ExteriorIntegral {
    double tail_route;
    double complement_route;
};
ExteriorIntegral exterior_integral(cplx q, const LatticeBasis& basis, const SingularQuadratureSettings& settings = {});

struct MonteCarloEstimate {
    double mean;
    double standard_error;
};
/// Importance-sampled estimate of the same exterior integral (radii with density ~ r^-3).
MonteCarloEstimate exterior_integral_monte_carlo(cplx q, const LatticeBasis& basis, std::size_t samples,
                                                 std::uint64_t seed);

}  // namespace tg
