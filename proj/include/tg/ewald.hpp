#pragma once

#include <vector>

#include "tg/lattice.hpp"

namespace tg {

// Gaussian-split lattice sum for the zero-mean periodic Green's function of -Laplacian:
//
//   G(r) = 1/(4 pi) sum_lambda E1(alpha^2 |r - lambda|^2) - 1/(4 alpha^2 |Omega|)
//        + 1/|Omega| sum_{k != 0} cos(2 pi k.r) exp(-pi^2 |k|^2 / alpha^2) / (4 pi^2 |k|^2)
//
// with k over the dual lattice and alpha = sqrt(pi/|Omega|). Both sums are
// truncated where the Gaussian factors drop below e^{-50}. The k = 0 mode is
// absent, so the mean over the cell is zero by construction.
class EwaldSum {
public:
    explicit EwaldSum(const LatticeBasis& basis);

    /// Value at z (z not a lattice point).
    double value(cplx z) const;

    std::size_t real_terms() const { return real_.size(); }
    std::size_t reciprocal_terms() const { return recip_.size(); }

private:
    struct Mode {
        double kx;
        double ky;
        double weight;
    };
    LatticeBasis basis_;
    double alpha2_;
    double background_;
    std::vector<cplx> real_;
    std::vector<Mode> recip_;
};

}  // namespace tg
