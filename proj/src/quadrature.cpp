#include "tg/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tg {
namespace {

GaussRule build_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 512) {
        throw std::invalid_argument("Gauss-Legendre order must be in [1, 512]");
    }
    static std::mutex guard;
    static std::map<int, std::unique_ptr<GaussRule>> rules;
    std::lock_guard lock(guard);
    auto& slot = rules[n];
    if (!slot) {
        slot = std::make_unique<GaussRule>(build_rule(n));
    }
    return *slot;
}

Extrapolation richardson(std::span<const double> values, double ratio, int power) {
    const std::size_t n = values.size();
    if (n == 0) {
        throw std::invalid_argument("richardson needs at least one value");
    }
    std::vector<std::vector<double>> table(n);
    for (std::size_t i = 0; i < n; ++i) {
        table[i].resize(i + 1);
        table[i][0] = values[i];
        double factor = std::pow(ratio, power);
        for (std::size_t j = 1; j <= i; ++j) {
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            factor *= std::pow(ratio, power);
        }
    }
    const double best = table[n - 1][n - 1];
    const double err = n > 1 ? std::abs(best - table[n - 1][n - 2]) : 0.0;
    return {best, err};
}

}  // namespace tg
