#include "mosb/relaxation.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "mosb/errors.hpp"
#include "mosb/solver.hpp"

namespace mosb {

const char* to_string(Direction d) { return d == Direction::Lower ? "lower" : "upper"; }

int truncation_degree(const GmpProblem& p, int r) {
    if (r < 1) throw InvalidInput("relaxation level must be >= 1");
    int d_max = p.max_data_degree();
    return 2 * r + 2 * ((d_max + 1) / 2);
}

namespace {

Cell normalized(const Cell& c, double B) {
    Cell s = c;
    for (auto& v : s.lo) v /= B;
    for (auto& v : s.hi) v /= B;
    for (auto& h : s.halfspaces) h.c /= B;
    for (auto& v : s.rep) v /= B;
    return s;
}

void add_terms(LinExpr& expr, int offset, const MonomialBasis& basis, const Polynomial& f) {
    for (const auto& [m, c] : f.terms()) expr.emplace_back(offset + basis.index_of(m), c);
}

void pack_expr(LinExpr& e) {
    std::sort(e.begin(), e.end());
    LinExpr packed;
    for (const auto& [k, v] : e) {
        if (!packed.empty() && packed.back().first == k)
            packed.back().second += v;
        else
            packed.emplace_back(k, v);
    }
    e = std::move(packed);
}

}  // namespace

ConicProgram assemble_outer(const GmpProblem& p, const Partition& part, int r, Direction dir) {
    const int n = p.n;
    const double B = p.box_bound;
    const int t = truncation_degree(p, r);
    MonomialBasis basis(n, t);
    const int per_cell = basis.size();
    const int cells = static_cast<int>(part.cells.size());

    ConicProgram prog;
    prog.num_vars = cells * per_cell;
    prog.nonneg_vars.resize(prog.num_vars);
    for (int i = 0; i < prog.num_vars; ++i) prog.nonneg_vars[i] = i;
    prog.sense = dir == Direction::Upper ? Sense::Maximize : Sense::Minimize;

    const MultiIndex zero(n);
    MonomialBasis obj_rows(n, r);  // moment matrix row basis

    // Per-cell PSD blocks: moment matrix at order r, one localizing block per
    // cell localizer at the largest admissible order.
    for (int ci = 0; ci < cells; ++ci) {
        const Cell cell = normalized(part.cells[ci], B);
        const int off = ci * per_cell;

        SymbolicBlock mom;
        mom.group = ci;
        mom.label = "moment";
        mom.order = obj_rows.size();
        for (int a = 0; a < obj_rows.size(); ++a)
            for (int b = a; b < obj_rows.size(); ++b) {
                LinExpr e;
                e.emplace_back(off + basis.index_of(obj_rows[a] + obj_rows[b]), 1.0);
                mom.entries.push_back(std::move(e));
            }
        prog.psd_blocks.push_back(std::move(mom));

        auto locs = cell_localizers(cell);
        int li = 0;
        for (const auto& g : locs) {
            int rho = (t - g.degree()) / 2;
            if (rho < 0) throw DegreeOverflow("localizer degree exceeds truncation");
            MonomialBasis rows(n, rho);
            SymbolicBlock blk;
            blk.group = ci;
            blk.label = li < n ? "box" + std::to_string(li + 1) : "cut";
            blk.order = rows.size();
            for (int a = 0; a < rows.size(); ++a)
                for (int b = a; b < rows.size(); ++b) {
                    LinExpr e;
                    MultiIndex ab = rows[a] + rows[b];
                    for (const auto& [m, c] : g.terms())
                        e.emplace_back(off + basis.index_of(ab + m), c);
                    pack_expr(e);
                    blk.entries.push_back(std::move(e));
                }
            prog.psd_blocks.push_back(std::move(blk));
            ++li;
        }
    }

    // Option equalities over active sets.
    for (std::size_t j = 0; j < p.options.size(); ++j) {
        const auto& o = p.options[j];
        MultiIndex ea(n);
        ea.e[o.asset_index - 1] = 1;
        LinearConstraint eq;
        for (int cid : part.option_active[j]) {
            int off = (cid - 1) * per_cell;
            eq.expr.emplace_back(off + basis.index_of(ea), 1.0);
            eq.expr.emplace_back(off + basis.index_of(zero), -o.strike / B);
        }
        eq.rhs = o.price / B;
        prog.equalities.push_back(std::move(eq));
    }

    // Polynomial moment constraints over all cells, row-scaled by B^{-deg f}.
    for (const auto& mc : p.moments) {
        const int deg = mc.f.degree();
        Polynomial fn = mc.f.scale_variables(B) * std::pow(B, -deg);
        LinearConstraint row;
        for (int ci = 0; ci < cells; ++ci) add_terms(row.expr, ci * per_cell, basis, fn);
        row.rhs = mc.rhs * std::pow(B, -deg);
        if (mc.relation == MomentConstraint::Relation::Equality)
            prog.equalities.push_back(std::move(row));
        else
            prog.inequalities.push_back(std::move(row));
    }

    // Normalization: total mass one.
    {
        LinearConstraint eq;
        for (int ci = 0; ci < cells; ++ci)
            eq.expr.emplace_back(ci * per_cell + basis.index_of(zero), 1.0);
        eq.rhs = 1.0;
        prog.equalities.push_back(std::move(eq));
    }

    // d-th moment cap.
    if (p.moment_cap) {
        Polynomial cap = Polynomial::euclidean_norm_power(n, p.d);
        LinearConstraint row;
        for (int ci = 0; ci < cells; ++ci) add_terms(row.expr, ci * per_cell, basis, cap);
        row.rhs = *p.moment_cap * std::pow(B, -p.d);
        prog.inequalities.push_back(std::move(row));
    }

    // Objective: active payoff piece per cell, in units of B.
    auto pieces = payoff_pieces(p.payoff, n);
    for (int ci = 0; ci < cells; ++ci) {
        int pi = part.cells[ci].active_piece;
        if (pi < 0) continue;
        Polynomial piece = pieces[pi].poly.scale_variables(B) * (1.0 / B);
        add_terms(prog.objective, ci * per_cell, basis, piece);
    }
    pack_expr(prog.objective);
    return prog;
}

BoundReport solve_outer(const GmpProblem& p, const Partition& part, int r, Direction dir,
                        const SolverSettings& settings) {
    auto t0 = std::chrono::steady_clock::now();
    ConicProgram prog = assemble_outer(p, part, r, dir);
    BoundReport rep;
    rep.direction = to_string(dir);
    rep.level = r;
    rep.cells = static_cast<int>(part.cells.size());
    rep.psd_blocks = static_cast<int>(prog.psd_blocks.size());
    rep.variables = prog.num_vars;
    rep.equalities = static_cast<int>(prog.equalities.size());
    rep.inequalities = prog.inequality_count_reported();
    rep.strike = p.payoff.strike;
    rep.value = std::numeric_limits<double>::quiet_NaN();
    try {
        ConicSolution sol = solve_conic(prog, settings);
        rep.status = sol.status;
        rep.duality_gap = sol.gap;
        if (sol.status == SolveStatus::Optimal) rep.value = sol.objective * p.box_bound;
    } catch (const Error&) {
        rep.status = SolveStatus::NumericalFailure;
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

BoundReport solve_outer(const GmpProblem& p, int r, Direction dir,
                        const SolverSettings& settings) {
    Partition part = build_cells(p);
    return solve_outer(p, part, r, dir, settings);
}

std::vector<std::pair<BoundReport, BoundReport>> sweep_strikes(
    const GmpProblem& p, const std::vector<double>& strikes, int r,
    const SolverSettings& settings, bool parallel) {
    auto run_one = [&](double K) -> std::pair<BoundReport, BoundReport> {
        GmpProblem q = p;
        q.payoff.strike = K;
        try {
            Partition part = build_cells(q);
            auto lo = solve_outer(q, part, r, Direction::Lower, settings);
            auto hi = solve_outer(q, part, r, Direction::Upper, settings);
            return {lo, hi};
        } catch (const Error& e) {
            BoundReport bad;
            bad.level = r;
            bad.strike = K;
            bad.status = SolveStatus::NumericalFailure;
            bad.value = std::numeric_limits<double>::quiet_NaN();
            BoundReport bad2 = bad;
            bad.direction = "lower";
            bad2.direction = "upper";
            return {bad, bad2};
        }
    };
    std::vector<std::pair<BoundReport, BoundReport>> out(strikes.size());
    if (parallel && strikes.size() > 1) {
        std::vector<std::future<std::pair<BoundReport, BoundReport>>> futs;
        for (double K : strikes)
            futs.push_back(std::async(std::launch::async, run_one, K));
        for (std::size_t i = 0; i < futs.size(); ++i) out[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < strikes.size(); ++i) out[i] = run_one(strikes[i]);
    }
    return out;
}

}  // namespace mosb
