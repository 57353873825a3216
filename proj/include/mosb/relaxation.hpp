#pragma once

#include <vector>

#include "mosb/conic.hpp"
#include "mosb/model.hpp"
#include "mosb/partition.hpp"

namespace mosb {

enum class Direction { Lower, Upper };

const char* to_string(Direction d);

/// Moment truncation t(r) = 2r + 2*ceil(d_max/2); the per-cell moment vector
/// runs over N^n_t.
int truncation_degree(const GmpProblem& p, int r);

/// Assemble the level-r outer relaxation over the partition as a block conic
/// program with doubly-nonnegative moment conditions. Data are normalized by
/// B internally; the objective is in units of B.
ConicProgram assemble_outer(const GmpProblem& p, const Partition& part, int r, Direction dir);

/// Build the partition, assemble and solve one direction; the reported value
/// is rescaled to price units.
BoundReport solve_outer(const GmpProblem& p, int r, Direction dir,
                        const SolverSettings& settings = {});

/// solve_outer against a prebuilt partition (reused across directions).
BoundReport solve_outer(const GmpProblem& p, const Partition& part, int r, Direction dir,
                        const SolverSettings& settings = {});

/// Independent (lower, upper) pair per strike; per-strike failures are
/// reported inline and the sweep continues.
std::vector<std::pair<BoundReport, BoundReport>> sweep_strikes(
    const GmpProblem& p, const std::vector<double>& strikes, int r,
    const SolverSettings& settings = {}, bool parallel = true);

}  // namespace mosb
