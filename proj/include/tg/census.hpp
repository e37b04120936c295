#pragma once

#include <string>
#include <vector>

#include "tg/green.hpp"
#include "tg/parallel.hpp"

namespace tg {

enum class PointKind { half_period, extra_pair_member };

/// Morse type of a critical point of G. G has no interior maxima on the
/// punctured torus (its maximum is the pole), so in practice only `min` and
/// `saddle` occur; `max` is kept for completeness of the classifier.
enum class MorseType { min, max, saddle, degenerate };

std::string to_string(PointKind kind);
std::string to_string(MorseType type);

struct CriticalPoint {
    TorusPoint point;
    PointKind kind = PointKind::half_period;
    MorseType morse = MorseType::degenerate;
    double gradient_norm = 0.0;
    Sym2 hessian;
};

struct CensusOptions {
    int grid_n = 128;
    double newton_tol = 1e-10;
    int max_iterations = 50;
    double dedup_tol = 1e-7;
    double damping = 1e-10;  // Levenberg-Marquardt, relative to |H|^2
    Exec exec = Exec::parallel;
};

/// Result of the winding-number brute force over a grid of cells.
struct WindingCensus {
    int grid_n = 0;
    int nonzero_cells = 0;
    int index_sum = 0;
    struct Cell {
        cplx center;
        int index;
    };
    std::vector<Cell> cells;  // cells with nonzero index
};

struct CriticalCensus {
    std::vector<CriticalPoint> points;  // half-periods first, then the +-a pair
    int count = 0;

    // diagnostics
    int seeds = 0;
    int accepted = 0;
    int left_cell = 0;
    int not_converged = 0;
    WindingCensus oracle;

    const CriticalPoint* extra() const;  // canonical member of the extra pair, or nullptr
};

/// All critical points of G(., 0): Newton from a grid_n x grid_n seed grid on the
/// reduced cell, deduplicated modulo the lattice, classified, and cross-checked
/// against winding numbers of grad G on an offset grid of the same size.
///
/// Throws ResolutionError when more than half the seeds fail to converge or when the
/// winding oracle disagrees with the Newton census, and InternalError when the
/// deduplicated count is not 3 or 5.
CriticalCensus find_critical_points(const GreenFunction& green, const CensusOptions& options = {});
CriticalCensus find_critical_points(const LatticeBasis& basis, int grid_n, double newton_tol);

/// Winding numbers of grad G around each cell of an offset grid, excluding cells
/// near the pole.
WindingCensus winding_census(const GreenFunction& green, int grid_n, Exec exec = Exec::parallel);

MorseType classify_critical_point(cplx x, const GreenFunction& green);
MorseType classify_hessian(const Sym2& hessian);

/// True iff x is within tol of a point y with 4y in the lattice and 2y not in the lattice.
bool is_four_torsion(cplx x, const LatticeBasis& basis, double tol);

}  // namespace tg
