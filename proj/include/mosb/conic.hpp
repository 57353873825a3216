#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mosb {

/// Sparse linear expression over program variables, sorted by variable index.
using LinExpr = std::vector<std::pair<int, double>>;

struct LinearConstraint {
    LinExpr expr;
    double rhs = 0.0;
};

/// Symbolic symmetric PSD block: entry (p,q), p <= q, is a linear expression
/// in program variables. `group` tags the partition cell the block belongs to
/// (-1 when ungrouped); the solver uses it for block-bordered elimination.
struct SymbolicBlock {
    int group = -1;
    std::string label;
    int order = 0;
    std::vector<LinExpr> entries;  // size order*(order+1)/2, row-major upper triangle

    static int upper_index(int p, int q, int order) {  // p <= q
        return p * order - p * (p - 1) / 2 + (q - p);
    }
};

enum class Sense { Minimize, Maximize };

/// Block conic optimization problem: linear objective over scalar variables,
/// linear equalities/inequalities, symbolic PSD blocks, and a set of
/// variables constrained elementwise nonnegative.
struct ConicProgram {
    int num_vars = 0;
    std::vector<int> nonneg_vars;  // indices of variables constrained >= 0
    Sense sense = Sense::Minimize;
    LinExpr objective;
    double objective_constant = 0.0;
    std::vector<LinearConstraint> equalities;    // expr == rhs
    std::vector<LinearConstraint> inequalities;  // expr <= rhs
    std::vector<SymbolicBlock> psd_blocks;

    int inequality_count_reported() const {
        return static_cast<int>(inequalities.size() + nonneg_vars.size());
    }
};

struct SolverSettings {
    int max_iterations = 200;
    double feasibility_tol = 1e-8;
    double gap_tol = 1e-8;
    double step_fraction = 0.98;
    bool verbose = false;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<double> x;         // primal values per program variable
    std::vector<double> eq_duals;  // multipliers per equality
    std::vector<double> ineq_duals;
    double objective = 0.0;        // in the program's sense
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// One bound computation outcome.
struct BoundReport {
    std::string direction;  // "upper" | "lower"
    int level = 0;
    double value = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
    double duality_gap = 0.0;
    double wall_time = 0.0;  // seconds
    int cells = 0;
    int psd_blocks = 0;
    // problem-size bookkeeping for reports
    int variables = 0;
    int equalities = 0;
    int inequalities = 0;
    double strike = 0.0;  // K the report refers to (sweeps)
};

}  // namespace mosb
