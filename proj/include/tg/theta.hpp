#pragma once

#include <complex>
#include <vector>

namespace tg {

// Jacobi theta_1 in the convention with periods pi and pi*tau:
//
//   theta_1(v | tau) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) v),   q = exp(i pi tau).
//
// Theta1Series fixes tau, precomputes the coefficients and truncates the sum
// once the remaining terms fall below 1e-16 relative to the leading one for
// every |Im v| up to the bound passed at construction.
class Theta1Series {
public:
    struct Derivatives {
        std::complex<double> value;   // theta_1(v)
        std::complex<double> first;   // d/dv
        std::complex<double> second;  // d^2/dv^2
    };

    Theta1Series(std::complex<double> tau, double max_abs_imag_v);

    std::complex<double> tau() const { return tau_; }
    std::size_t terms() const { return coeff_.size(); }

    std::complex<double> value(std::complex<double> v) const;
    Derivatives derivatives(std::complex<double> v) const;

    /// theta_1(v)/v, accurate as v -> 0.
    std::complex<double> value_over_v(std::complex<double> v) const;

    /// theta_1'(0).
    std::complex<double> derivative_at_zero() const;

private:
    std::complex<double> tau_;
    std::vector<std::complex<double>> coeff_;  // 2 (-1)^n q^{(n+1/2)^2}
};

/// ln|eta(tau)| from the product q^{1/12} prod_{n>=1} (1 - q^{2n}), q = exp(i pi tau).
double log_abs_dedekind_eta(std::complex<double> tau);

}  // namespace tg
