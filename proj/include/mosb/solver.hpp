#pragma once

#include <string>
#include <vector>

#include "mosb/conic.hpp"

namespace mosb {

/// Solve a block conic program with the embedded homogeneous self-dual
/// interior-point method (Nesterov-Todd scaling, Mehrotra corrector).
/// Throws NumericalFailure / IllConditioned when no conclusive status is
/// reached within the iteration budget.
ConicSolution solve_conic(const ConicProgram& prog, const SolverSettings& settings = {});

/// Serialize the program in SDPA sparse format (.dat-s).
std::string export_sdpa(const ConicProgram& prog);

namespace detail {

/// Standard-form lowering: x in K = R+^nl x PSD(s_1) x ... , A x = b.
/// Program variables map to cone coordinates (direct or scaled); inequality
/// rows gain LP slacks; non-embedded PSD blocks gain svec slack coordinates
/// tied by structural rows.
struct StdForm {
    int nl = 0;
    std::vector<int> psd;          // block orders
    std::vector<int> psd_offset;   // coordinate offset of each block
    int dim = 0;

    std::vector<std::vector<std::pair<int, double>>> rows;  // sparse A
    std::vector<double> b;
    std::vector<double> c;         // always minimize c.x
    double obj_sign = 1.0;         // program objective = obj_sign * c.x
    std::vector<int> row_group;    // -1 = border (coupling) row
    int num_groups = 0;

    // program variable -> (coordinate, scale) with value = scale * x[coord];
    // free variables map to a split pair (pos, neg).
    struct VarMap {
        int coord = -1;
        int neg_coord = -1;  // >= 0 only for split free variables
        double scale = 1.0;
    };
    std::vector<VarMap> var_map;

    std::vector<int> eq_row;    // program equality -> row index
    std::vector<int> ineq_row;  // program inequality -> row index
    std::vector<double> row_scale;  // applied equilibration factor

    double var_value(int v, const std::vector<double>& x) const {
        const VarMap& m = var_map[v];
        double val = m.scale * x[m.coord];
        if (m.neg_coord >= 0) val -= m.scale * x[m.neg_coord];
        return val;
    }
};

StdForm lower_program(const ConicProgram& prog);

}  // namespace detail

}  // namespace mosb
