#pragma once

#include <span>
#include <vector>

namespace tg {

/// Gauss-Legendre rule on [-1, 1]. Nodes ascending.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule, computed once per n and cached (thread-safe).
const GaussRule& gauss_legendre(int n);

/// Maps the rule onto [a, b]: node i at mid + half * x_i, weight half * w_i.
struct ScaledRule {
    double mid;
    double half;
    double node(const GaussRule& rule, std::size_t i) const { return mid + half * rule.nodes[i]; }
    double weight(const GaussRule& rule, std::size_t i) const { return half * rule.weights[i]; }
};
inline ScaledRule scaled(double a, double b) { return {0.5 * (a + b), 0.5 * (b - a)}; }

/// Richardson table for values at step sizes h_0 > h_1 > ... with h_{m+1} = h_m / ratio
/// and an error expansion in powers h^{p}, h^{2p}, h^{3p}, ...
///
/// Returns the fully extrapolated value and |T[n][n] - T[n][n-1]| as its error.
struct Extrapolation {
    double value;
    double error;
};
Extrapolation richardson(std::span<const double> values, double ratio, int power);

}  // namespace tg
