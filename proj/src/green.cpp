#include "tg/green.hpp"

#include <cmath>
#include <numbers>

#include "tg/error.hpp"

namespace tg {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double inv2pi = 1.0 / (2.0 * pi);

double theta_imag_bound(const LatticeBasis& basis) {
    return pi * 0.5 * (1.0 + std::abs(basis.reduced_tau())) + 1.0;
}

}  // namespace

GreenFunction::GreenFunction(const LatticeBasis& basis, bool)
    : basis_(basis),
      r1_(basis.reduced1()),
      im_tau_(basis.reduced_tau().imag()),
      theta_(basis.reduced_tau(), theta_imag_bound(basis)),
      ewald_(basis) {}

GreenFunction::GreenFunction(const LatticeBasis& basis, ConstantCache& cache)
    : GreenFunction(basis, true) {
    constants_ = cache.get_or_compute(basis, [this] {
        GreenConstants c;
        double acc = 0.0;
        for (const TorusPoint& hp : half_periods(basis_)) {
            const cplx w = nearest_image(hp.z, basis_);
            acc += ewald_.value(w) - raw_value(w);
        }
        c.normalization = acc / 3.0;
        c.robin = -inv2pi * std::log(std::abs(pi * theta_.derivative_at_zero() / r1_)) + c.normalization;
        return c;
    });
}

GreenConstants GreenFunction::compute_constants(const LatticeBasis& basis) {
    ConstantCache scratch;
    return GreenFunction(basis, scratch).constants_;
}

cplx GreenFunction::checked_image(cplx x) const {
    const cplx w = nearest_image(x, basis_);
    if (std::abs(w) < 1e-12 * basis_.max_period()) {
        throw SingularityError("Green's function evaluated at the pole (distance < 1e-12)");
    }
    return w;
}

double GreenFunction::raw_value(cplx w) const {
    const cplx v = pi * w / r1_;
    const double y = (w / r1_).imag();
    return -inv2pi * std::log(std::abs(theta_.value(v))) + y * y / (2.0 * im_tau_);
}

double GreenFunction::value(cplx x) const {
    return raw_value(checked_image(x)) + constants_.normalization;
}

double GreenFunction::value(cplx x, Backend backend) const {
    return backend == Backend::theta ? value(x) : ewald_value(x);
}

double GreenFunction::ewald_value(cplx x) const { return ewald_.value(checked_image(x)); }

GreenEvaluation GreenFunction::evaluate(cplx x) const {
    const cplx w = checked_image(x);
    const cplx scale = pi / r1_;
    const cplx v = scale * w;
    const auto d = theta_.derivatives(v);
    const cplx l1 = scale * d.first / d.value;
    const cplx ratio = d.first / d.value;
    const cplx l2 = scale * scale * (d.second / d.value - ratio * ratio);

    // Im(w / r1) = n . (x, y) with n = (-Im r1, Re r1) / |r1|^2
    const double n2 = std::norm(r1_);
    const Vec2 n{-r1_.imag() / n2, r1_.real() / n2};
    const double y = (w / r1_).imag();

    GreenEvaluation out;
    out.value = -inv2pi * std::log(std::abs(d.value)) + y * y / (2.0 * im_tau_) + constants_.normalization;
    out.gradient = Vec2{-inv2pi * l1.real() + y * n.x / im_tau_, inv2pi * l1.imag() + y * n.y / im_tau_};
    out.hessian = Sym2{-inv2pi * l2.real() + n.x * n.x / im_tau_,
                       inv2pi * l2.imag() + n.x * n.y / im_tau_,
                       inv2pi * l2.real() + n.y * n.y / im_tau_};
    return out;
}

Vec2 GreenFunction::gradient(cplx x) const { return evaluate(x).gradient; }

Sym2 GreenFunction::hessian(cplx x) const { return evaluate(x).hessian; }

double GreenFunction::regular(cplx x) const {
    const cplx w = nearest_image(x, basis_);
    const double r = std::abs(w);
    if (r == 0.0) {
        return constants_.robin;
    }
    if (r < 0.25 * std::abs(r1_)) {
        const cplx v = pi * w / r1_;
        const double y = (w / r1_).imag();
        const cplx ratio = (pi / r1_) * theta_.value_over_v(v);
        return -inv2pi * std::log(std::abs(ratio)) + y * y / (2.0 * im_tau_) + constants_.normalization;
    }
    return raw_value(w) + constants_.normalization + inv2pi * std::log(r);
}

Vec2 GreenFunction::regular_gradient(cplx x) const {
    const cplx w = nearest_image(x, basis_);
    const double r2 = std::norm(w);
    if (r2 == 0.0) {
        return {};
    }
    const Vec2 g = evaluate(w).gradient;
    return Vec2{g.x + inv2pi * w.real() / r2, g.y + inv2pi * w.imag() / r2};
}

double green_value(const TorusPoint& x, const LatticeBasis& basis) {
    return GreenFunction(basis).value(x.z);
}

Vec2 green_gradient(const TorusPoint& x, const LatticeBasis& basis) {
    return GreenFunction(basis).gradient(x.z);
}

Sym2 green_hessian(const TorusPoint& x, const LatticeBasis& basis) {
    return GreenFunction(basis).hessian(x.z);
}

double regular_part_gamma(const TorusPoint& x, const TorusPoint& q, const LatticeBasis& basis) {
    return GreenFunction(basis).regular_part(x.z, q.z);
}

double ewald_green_value(const TorusPoint& x, const LatticeBasis& basis) {
    return GreenFunction(basis).ewald_value(x.z);
}

}  // namespace tg
