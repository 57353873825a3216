#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mosb/model.hpp"

namespace mosb {

/// One basic closed semialgebraic tile: a grid box possibly cut by payoff
/// activation halfspaces. Every max-term of the problem has constant sign on
/// the cell interior.
struct Cell {
    int id = 0;  // 1-based, deterministic
    std::vector<double> lo, hi;
    std::vector<Halfspace> halfspaces;  // cuts beyond the box faces
    int active_piece = -1;              // payoff piece index, -1 = payoff zero
    std::vector<double> rep;            // strictly interior representative point
};

struct Partition {
    int n = 0;
    std::vector<Cell> cells;
    /// J_j per observed option (in the problem's sorted option order): 1-based
    /// ids of cells where the option's payoff is affine-positive.
    std::vector<std::vector<int>> option_active;
    /// J_0: cells with a nonzero objective piece.
    std::vector<int> objective_cells;
};

/// Univariate segmentation: cut [0,B] at every strike and at K.
Partition segment_univariate(const std::vector<double>& strikes, double K, double B);

/// General cell enumeration: per-asset strike grid, boxes split along payoff
/// activation hyperplanes.
Partition build_cells(const GmpProblem& p, std::int64_t max_cells = 1000000);

/// Support description of the cell as in (ksemialg): one quadratic box
/// product per coordinate plus each halfspace as an affine polynomial.
std::vector<Polynomial> cell_localizers(const Cell& c);

void write_cells_csv(const Partition& part, std::ostream& os);

/// Chebyshev center of { lo <= x <= hi, a.x >= c } (largest inscribed ball).
/// Returns the radius; center written to x. Radius <= 0 means empty interior.
double chebyshev_center(const std::vector<double>& lo, const std::vector<double>& hi,
                        const std::vector<Halfspace>& halfspaces, std::vector<double>& x);

}  // namespace mosb
