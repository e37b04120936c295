#pragma once

#include "tg/constant_cache.hpp"
#include "tg/ewald.hpp"
#include "tg/lattice.hpp"
#include "tg/theta.hpp"
#include "tg/vec2.hpp"

namespace tg {

enum class Backend { theta, ewald };

struct GreenEvaluation {
    double value = 0.0;
    Vec2 gradient;
    Sym2 hessian;
};

/// Green's function of -Laplacian on the flat torus with pole at 0,
///
///   -Laplacian G = delta_0 - 1/|Omega|,   G doubly periodic,   integral of G over Omega = 0.
///
/// The primary backend is the theta representation on the reduced basis (r1, r2), tau = r2/r1:
///
///   G(z) = -ln|theta_1(pi z / r1 | tau)| / (2 pi) + Im(z/r1)^2 / (2 Im tau) + c,
///
/// differentiated analytically for the gradient and Hessian. The additive constant c is
/// fixed by matching the zero-mean Ewald sum at the three half-periods and is cached per
/// basis in a ConstantCache.
class GreenFunction {
public:
    explicit GreenFunction(const LatticeBasis& basis, ConstantCache& cache = ConstantCache::global());

    const LatticeBasis& basis() const { return basis_; }

    double value(cplx x) const;
    double value(cplx x, Backend backend) const;
    Vec2 gradient(cplx x) const;
    Sym2 hessian(cplx x) const;
    GreenEvaluation evaluate(cplx x) const;

    /// Independent Ewald backend (value only).
    double ewald_value(cplx x) const;

    /// gamma(w) = G(w) + ln|w|/(2 pi) with w the nearest image of x; robin() at w = 0.
    double regular(cplx x) const;
    /// gamma(x, q) = regular(x - q).
    double regular_part(cplx x, cplx q) const { return regular(x - q); }
    /// Gradient of gamma(w) in w; vanishes at w = 0 by evenness.
    Vec2 regular_gradient(cplx x) const;

    double robin() const { return constants_.robin; }
    double normalization() const { return constants_.normalization; }

    /// Computes the constants from scratch (no cache).
    static GreenConstants compute_constants(const LatticeBasis& basis);

private:
    GreenFunction(const LatticeBasis& basis, bool);  // constants left unset

    cplx checked_image(cplx x) const;
    double raw_value(cplx w) const;

    LatticeBasis basis_;
    cplx r1_;
    double im_tau_;
    Theta1Series theta_;
    EwaldSum ewald_;
    GreenConstants constants_;
};

// Free-function surface; each call builds (or fetches cached constants for) a
// GreenFunction, so tight loops should hold a GreenFunction instead.
double green_value(const TorusPoint& x, const LatticeBasis& basis);
Vec2 green_gradient(const TorusPoint& x, const LatticeBasis& basis);
Sym2 green_hessian(const TorusPoint& x, const LatticeBasis& basis);
double regular_part_gamma(const TorusPoint& x, const TorusPoint& q, const LatticeBasis& basis);
double ewald_green_value(const TorusPoint& x, const LatticeBasis& basis);

}  // namespace tg
