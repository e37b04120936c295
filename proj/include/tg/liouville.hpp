#pragma once

#include <array>
#include <span>
#include <vector>

#include "tg/parallel.hpp"

namespace tg {

/// Radial solutions of the coupled system
///   V1'' + V1'/r + c2 e^{V2} = 0,   V2'' + V2'/r + c1 e^{V1} = 0,
/// with V_i(0) = a_i and V_i'(0) = 0.
struct ShootOptions {
    double r_max = 1e4;
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    int samples_per_decade = 200;  // output radii, log-spaced beyond r = 1
};

struct RadialProfile {
    double c1 = 1.0;
    double c2 = 1.0;
    double a1 = 0.0;
    double a2 = 0.0;
    std::vector<double> r;
    std::vector<double> v1, v2;
    std::vector<double> dv1, dv2;
    /// 2 pi int_0^r c_{3-i} e^{V_{3-i}} s ds, integrated alongside V.
    std::vector<double> mass1, mass2;

    std::size_t size() const { return r.size(); }
};

/// Throws ConfigError for non-positive c_i or r_max < 1, StiffnessError when the
/// integrator cannot make progress.
RadialProfile shoot(double c1, double c2, double a1, double a2, const ShootOptions& options = {});

/// (V1, V2, V1', V2') at the requested radii (any order, all > 0).
std::vector<std::array<double, 4>> sample_profile(double c1, double c2, double a1, double a2,
                                                  std::span<const double> radii,
                                                  const ShootOptions& options = {});

struct MassPair {
    double m1 = 0.0;
    double m2 = 0.0;
    double i1 = 0.0;  // V_i(r) = -(M_i / 2 pi) ln r + I_i + o(1)
    double i2 = 0.0;
    std::array<double, 2> flux_mass{};      // -2 pi r V_i'(r) extended to infinity
    std::array<double, 2> integral_mass{};  // int c_{3-i} e^{V_{3-i}} extended to infinity
    double flux_integral_gap = 0.0;

    /// 1/M1 + 1/M2 - 1/(4 pi).
    double identity_residual() const;
};

/// Whether both fluxes -2 pi r V_i'(r) exceed 4 pi at the end of the profile. Off a band
/// of initial data one flux saturates below 4 pi and the other mass is infinite; such
/// profiles are not finite-mass solutions and have no tail constants.
bool finite_mass(const RadialProfile& profile);

/// Masses and tail constants from the last decade of the profile. Past r_max the source
/// of V_i is extrapolated as a power law anchored at the last sample; this fixes both the
/// truncated mass and the amplitude of the r^{2 - M_{3-i}/2pi} correction, and I_i is the
/// least-squares constant once that correction is removed. ResolutionError when a mass
/// does not exceed 4 pi or flux and integral masses differ by more than 1e-5.
MassPair masses(const RadialProfile& profile);

/// For the two writings (M1-8pi)+(M2-8pi) = (M_i-8pi)^2/(M_i-4pi), i = 1, 2: lhs - rhs.
std::array<double, 2> mass_defect_identity(double m1, double m2);

struct EqualMassSolution {
    double a2 = 0.0;
    RadialProfile profile;
    MassPair masses;
    std::array<double, 2> bracket{};
    int shots = 0;
};

/// Finds a2 with M1 = M2 by expanding a bracket around a1 and then a bracketing
/// secant/bisection solve. BracketError names the scanned interval when no sign
/// change is found.
EqualMassSolution solve_equal_masses(double c1, double c2, double a1, const ShootOptions& options = {});

/// Largest residual of the linearized system for the translation mode
/// (V1' x1/r, V2' x1/r) and the scaling mode (r V1' + 2, r V2' + 2), with five-point
/// Laplacians of step h on a fixed set of test points.
double linearized_kernel_residual(const RadialProfile& profile, double h = 1e-3);

struct ShotParameters {
    double c1, c2, a1, a2;
};
/// Masses for many independent shots; each shot is sequential, shots run in parallel.
std::vector<MassPair> shoot_masses(std::span<const ShotParameters> shots, const ShootOptions& options = {},
                                   Exec exec = Exec::parallel);

}  // namespace tg
