#include "mosb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mosb/errors.hpp"

namespace mosb {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

namespace detail {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};
}  // namespace

StdForm lower_program(const ConicProgram& prog) {
    StdForm f;
    f.var_map.resize(prog.num_vars);

    std::vector<bool> nonneg(prog.num_vars, false);
    for (int v : prog.nonneg_vars) nonneg[v] = true;

    // How many PSD blocks reference each variable, and with what shape.
    std::vector<int> block_refs(prog.num_vars, 0);
    for (const auto& blk : prog.psd_blocks)
        for (const auto& e : blk.entries)
            for (const auto& [v, c] : e) block_refs[v]++;

    // A block embeds directly as cone coordinates when every entry is a fresh
    // unit variable: no slack block or structural rows are needed for it.
    std::vector<bool> embedded(prog.psd_blocks.size(), false);
    for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k) {
        const auto& blk = prog.psd_blocks[k];
        bool ok = true;
        std::vector<int> seen;
        for (const auto& e : blk.entries) {
            if (e.size() != 1 || e[0].second != 1.0) { ok = false; break; }
            int v = e[0].first;
            if (nonneg[v] || block_refs[v] != 1) { ok = false; break; }
            seen.push_back(v);
        }
        std::sort(seen.begin(), seen.end());
        if (ok && std::adjacent_find(seen.begin(), seen.end()) != seen.end()) ok = false;
        embedded[k] = ok;
    }

    // LP coordinates: nonneg vars, split pairs for free vars, inequality slacks.
    int next = 0;
    std::vector<int> var_pending;  // free vars handled after nonneg ones
    for (int v = 0; v < prog.num_vars; ++v) {
        if (nonneg[v]) {
            f.var_map[v] = {next++, -1, 1.0};
        }
    }
    // Embedded-block variables get svec coordinates later; find them now.
    std::vector<bool> var_embedded(prog.num_vars, false);
    for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k)
        if (embedded[k])
            for (const auto& e : prog.psd_blocks[k].entries) var_embedded[e[0].first] = true;
    for (int v = 0; v < prog.num_vars; ++v)
        if (!nonneg[v] && !var_embedded[v]) var_pending.push_back(v);
    for (int v : var_pending) {
        int pos = next++, neg = next++;
        f.var_map[v] = {pos, neg, 1.0};
    }
    std::vector<int> ineq_slack(prog.inequalities.size());
    for (std::size_t i = 0; i < prog.inequalities.size(); ++i) ineq_slack[i] = next++;
    f.nl = next;

    // PSD coordinate layout.
    for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k) {
        const auto& blk = prog.psd_blocks[k];
        f.psd.push_back(blk.order);
        f.psd_offset.push_back(next);
        int tk = blk.order * (blk.order + 1) / 2;
        if (embedded[k]) {
            int e = 0;
            for (int p = 0; p < blk.order; ++p)
                for (int q = p; q < blk.order; ++q, ++e) {
                    int v = blk.entries[e][0].first;
                    f.var_map[v] = {next + e, -1, p == q ? 1.0 : 1.0 / kSqrt2};
                }
        }
        next += tk;
    }
    f.dim = next;

    auto translate = [&](const LinExpr& expr, std::vector<std::pair<int, double>>& row) {
        for (const auto& [v, c] : expr) {
            const auto& m = f.var_map[v];
            row.emplace_back(m.coord, c * m.scale);
            if (m.neg_coord >= 0) row.emplace_back(m.neg_coord, -c * m.scale);
        }
    };

    // Border rows: program equalities, then inequalities (+slack).
    for (const auto& eq : prog.equalities) {
        std::vector<std::pair<int, double>> row;
        translate(eq.expr, row);
        f.eq_row.push_back(static_cast<int>(f.rows.size()));
        f.rows.push_back(std::move(row));
        f.b.push_back(eq.rhs);
        f.row_group.push_back(-1);
    }
    for (std::size_t i = 0; i < prog.inequalities.size(); ++i) {
        std::vector<std::pair<int, double>> row;
        translate(prog.inequalities[i].expr, row);
        row.emplace_back(ineq_slack[i], 1.0);
        f.ineq_row.push_back(static_cast<int>(f.rows.size()));
        f.rows.push_back(std::move(row));
        f.b.push_back(prog.inequalities[i].rhs);
        f.row_group.push_back(-1);
    }

    // Structural rows tying non-embedded blocks to their entries.
    std::vector<int> raw_group;  // per structural row, the block's group tag
    for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k) {
        if (embedded[k]) continue;
        const auto& blk = prog.psd_blocks[k];
        int e = 0;
        for (int p = 0; p < blk.order; ++p)
            for (int q = p; q < blk.order; ++q, ++e) {
                double s = (p == q) ? 1.0 : kSqrt2;
                std::vector<std::pair<int, double>> row;
                for (const auto& [v, c] : blk.entries[e]) {
                    const auto& m = f.var_map[v];
                    row.emplace_back(m.coord, c * m.scale * s);
                    if (m.neg_coord >= 0) row.emplace_back(m.neg_coord, -c * m.scale * s);
                }
                row.emplace_back(f.psd_offset[k] + SymbolicBlock::upper_index(p, q, blk.order),
                                 -1.0);
                f.rows.push_back(std::move(row));
                f.b.push_back(0.0);
                f.row_group.push_back(blk.group);
            }
    }

    // Combine duplicate coordinates within each row, equilibrate.
    f.row_scale.assign(f.rows.size(), 1.0);
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        auto& row = f.rows[r];
        std::sort(row.begin(), row.end());
        std::vector<std::pair<int, double>> packed;
        for (const auto& [k, v] : row) {
            if (!packed.empty() && packed.back().first == k)
                packed.back().second += v;
            else
                packed.emplace_back(k, v);
        }
        packed.erase(std::remove_if(packed.begin(), packed.end(),
                                    [](const auto& p) { return p.second == 0.0; }),
                     packed.end());
        row = std::move(packed);
        double mx = 0.0;
        for (const auto& [k, v] : row) mx = std::max(mx, std::abs(v));
        if (mx > 0.0) {
            double s = 1.0 / mx;
            for (auto& [k, v] : row) v *= s;
            f.b[r] *= s;
            f.row_scale[r] = s;
        }
    }

    // Group sanity: a coordinate shared by rows of two different groups forces
    // a merge, so the block-bordered elimination stays exact.
    {
        int ng = 0;
        for (int g : f.row_group) ng = std::max(ng, g + 1);
        if (ng > 0) {
            UnionFind uf(ng);
            std::vector<int> owner(f.dim, -2);  // -2 unseen, -1 border-owned
            for (std::size_t r = 0; r < f.rows.size(); ++r) {
                int g = f.row_group[r];
                if (g < 0) continue;
                for (const auto& [k, v] : f.rows[r]) {
                    if (owner[k] == -2)
                        owner[k] = g;
                    else if (owner[k] >= 0 && uf.find(owner[k]) != uf.find(g))
                        uf.unite(owner[k], g);
                }
            }
            std::vector<int> remap(ng, -1);
            int next_id = 0;
            for (int g = 0; g < ng; ++g)
                if (uf.find(g) == g) remap[g] = next_id++;
            for (auto& g : f.row_group)
                if (g >= 0) g = remap[uf.find(g)];
            f.num_groups = next_id;
        }
    }

    // Objective.
    f.c.assign(f.dim, 0.0);
    f.obj_sign = prog.sense == Sense::Minimize ? 1.0 : -1.0;
    for (const auto& [v, cf] : prog.objective) {
        const auto& m = f.var_map[v];
        f.c[m.coord] += f.obj_sign * cf * m.scale;
        if (m.neg_coord >= 0) f.c[m.neg_coord] -= f.obj_sign * cf * m.scale;
    }
    return f;
}

}  // namespace detail

namespace {

using detail::StdForm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSqrt2 = 1.4142135623730951;

Eigen::MatrixXd smat(const double* u, int s) {
    MatrixXd M(s, s);
    int e = 0;
    for (int p = 0; p < s; ++p)
        for (int q = p; q < s; ++q, ++e) {
            double v = (p == q) ? u[e] : u[e] / kSqrt2;
            M(p, q) = v;
            M(q, p) = v;
        }
    return M;
}

void svec(const MatrixXd& M, double* u) {
    int s = static_cast<int>(M.rows());
    int e = 0;
    for (int p = 0; p < s; ++p)
        for (int q = p; q < s; ++q, ++e) u[e] = (p == q) ? M(p, p) : M(p, q) * kSqrt2;
}

/// Dense Cholesky with on-the-fly pivot perturbation; returns the factor L and
/// an estimate of the pivot spread for conditioning diagnostics.
struct PerturbedLlt {
    MatrixXd L;
    double min_piv = 0.0, max_piv = 0.0;
    int perturbed = 0;

    void factor(MatrixXd A) {
        const int n = static_cast<int>(A.rows());
        double maxdiag = 1e-300;
        for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, std::abs(A(i, i)));
        const double floor_piv = std::max(1e-14, 1e-13 * maxdiag);
        L = MatrixXd::Zero(n, n);
        min_piv = std::numeric_limits<double>::infinity();
        max_piv = 0.0;
        perturbed = 0;
        for (int j = 0; j < n; ++j) {
            double d = A(j, j) - L.row(j).head(j).squaredNorm();
            if (d < floor_piv) {
                d = floor_piv;
                ++perturbed;
            }
            double ld = std::sqrt(d);
            L(j, j) = ld;
            min_piv = std::min(min_piv, d);
            max_piv = std::max(max_piv, d);
            for (int i = j + 1; i < n; ++i) {
                double v = A(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
                L(i, j) = v / ld;
            }
        }
        if (n == 0) min_piv = max_piv = 1.0;
    }

    VectorXd solve(const VectorXd& rhs) const {
        VectorXd y = L.triangularView<Eigen::Lower>().solve(rhs);
        return L.transpose().triangularView<Eigen::Upper>().solve(y);
    }
};

class HsdSolver {
public:
    HsdSolver(const StdForm& f, const SolverSettings& st) : f_(f), st_(st) {
        m_ = static_cast<int>(f_.rows.size());
        N_ = f_.dim;
        nb_ = static_cast<int>(f_.psd.size());
        barrier_ = f_.nl;
        for (int s : f_.psd) barrier_ += s;

        b_ = Eigen::Map<const VectorXd>(f_.b.data(), m_);
        c_ = Eigen::Map<const VectorXd>(f_.c.data(), N_);

        coord_rows_.resize(N_);
        for (int r = 0; r < m_; ++r)
            for (const auto& [k, v] : f_.rows[r]) coord_rows_[k].emplace_back(r, v);

        // Row bookkeeping for the bordered Schur solve.
        group_rows_.resize(f_.num_groups);
        row_local_.resize(m_);
        for (int r = 0; r < m_; ++r) {
            int g = f_.row_group[r];
            if (g < 0) {
                row_local_[r] = static_cast<int>(border_rows_.size());
                border_rows_.push_back(r);
            } else {
                row_local_[r] = static_cast<int>(group_rows_[g].size());
                group_rows_[g].push_back(r);
            }
        }
        mb_ = static_cast<int>(border_rows_.size());

        // For blocks whose svec coordinates appear in arbitrary rows
        // (embedded Gram blocks), precompute the touching rows.
        block_rows_.resize(nb_);
        for (int k = 0; k < nb_; ++k) {
            int off = f_.psd_offset[k];
            int tk = f_.psd[k] * (f_.psd[k] + 1) / 2;
            std::map<int, std::vector<std::pair<int, double>>> touch;
            for (int e = 0; e < tk; ++e)
                for (const auto& [r, v] : coord_rows_[off + e]) touch[r].emplace_back(e, v);
            // Structural-only blocks (a single -1 per row) use the closed form.
            bool structural = true;
            for (const auto& [r, sub] : touch)
                if (sub.size() != 1 || sub[0].second != -1.0 || f_.row_group[r] < 0)
                    structural = false;
            block_structural_.push_back(structural && static_cast<int>(touch.size()) == tk);
            block_entry_rows_.emplace_back();
            if (!block_structural_.back()) {
                block_rows_[k].assign(touch.begin(), touch.end());
            } else {
                std::vector<int> rows(tk, -1);
                for (const auto& [r, sub] : touch) rows[sub[0].first] = r;
                block_entry_rows_.back() = std::move(rows);
            }
        }
    }

    ConicSolution run();

private:
    const StdForm& f_;
    SolverSettings st_;
    int m_ = 0, N_ = 0, nb_ = 0, mb_ = 0;
    double barrier_ = 0;

    std::vector<std::vector<std::pair<int, double>>> coord_rows_;
    std::vector<std::vector<int>> group_rows_;
    std::vector<int> border_rows_;
    std::vector<int> row_local_;
    std::vector<std::vector<std::pair<int, std::vector<std::pair<int, double>>>>> block_rows_;
    std::vector<bool> block_structural_;
    std::vector<std::vector<int>> block_entry_rows_;  // entry -> row, structural blocks only
    VectorXd b_, c_;

    // iterates
    VectorXd x_, z_, lam_;
    double tau_ = 1.0, kappa_ = 1.0;

    // per-iteration scaling state
    VectorXd lp_h_;                  // x_i/z_i on the LP cone
    std::vector<MatrixXd> W_, R_, Rinv_;
    std::vector<VectorXd> vdiag_;
    bool ill_conditioned_flag_ = false;

    // Schur data
    std::vector<PerturbedLlt> group_fact_;
    std::vector<MatrixXd> group_U_;  // mb x |g|
    std::vector<MatrixXd> group_E_;  // |g| x mb  (D^-1 U^T)
    PerturbedLlt border_fact_;

    VectorXd A_mul(const VectorXd& v) const {
        VectorXd out = VectorXd::Zero(m_);
        for (int r = 0; r < m_; ++r) {
            double s = 0.0;
            for (const auto& [k, c] : f_.rows[r]) s += c * v[k];
            out[r] = s;
        }
        return out;
    }

    VectorXd At_mul(const VectorXd& w) const {
        VectorXd out = VectorXd::Zero(N_);
        for (int r = 0; r < m_; ++r) {
            double wr = w[r];
            if (wr == 0.0) continue;
            for (const auto& [k, c] : f_.rows[r]) out[k] += c * wr;
        }
        return out;
    }

    VectorXd H_mul(const VectorXd& v) const {
        VectorXd out(N_);
        for (int i = 0; i < f_.nl; ++i) out[i] = lp_h_[i] * v[i];
        for (int k = 0; k < nb_; ++k) {
            int s = f_.psd[k], off = f_.psd_offset[k];
            MatrixXd V = smat(v.data() + off, s);
            MatrixXd T = W_[k] * V * W_[k];
            svec(T, out.data() + off);
        }
        return out;
    }

    void compute_scalings();
    void assemble_and_factor();
    VectorXd schur_solve(const VectorXd& rhs) const;
    VectorXd schur_solve_refined(const VectorXd& rhs) const;

    double step_to_boundary(const VectorXd& v, const VectorXd& dv) const;

    struct Direction {
        VectorXd dx, dz, dlam;
        double dtau = 0.0, dkappa = 0.0;
    };
    Direction solve_direction(double eta, const VectorXd& rc, double rtk, const VectorXd& rp,
                              const VectorXd& rd, double rg, const VectorXd& u1,
                              const VectorXd& Hc, double chc, const VectorXd& bAHc) const;
};

void HsdSolver::compute_scalings() {
    lp_h_.resize(f_.nl);
    for (int i = 0; i < f_.nl; ++i) lp_h_[i] = x_[i] / z_[i];
    W_.assign(nb_, MatrixXd());
    R_.assign(nb_, MatrixXd());
    Rinv_.assign(nb_, MatrixXd());
    vdiag_.assign(nb_, VectorXd());
    for (int k = 0; k < nb_; ++k) {
        int s = f_.psd[k], off = f_.psd_offset[k];
        MatrixXd X = smat(x_.data() + off, s);
        MatrixXd Z = smat(z_.data() + off, s);
        Eigen::LLT<MatrixXd> lz(Z);
        if (lz.info() != Eigen::Success) {
            Z += 1e-14 * MatrixXd::Identity(s, s);
            lz.compute(Z);
        }
        MatrixXd Lz = lz.matrixL();
        MatrixXd Mm = Lz.transpose() * X * Lz;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Mm);
        VectorXd d = es.eigenvalues().cwiseMax(1e-300);
        MatrixXd Q = es.eigenvectors();
        VectorXd d4 = d.array().pow(0.25);
        // R = Lz^{-T} Q diag(d^{1/4});  Rinv = diag(d^{-1/4}) Q^T Lz^T
        MatrixXd QT = Q * d4.asDiagonal();
        R_[k] = Lz.transpose().triangularView<Eigen::Upper>().solve(QT);
        Rinv_[k] = d4.cwiseInverse().asDiagonal() * Q.transpose() * Lz.transpose();
        W_[k] = R_[k] * R_[k].transpose();
        vdiag_[k] = d.array().sqrt();
    }
}

void HsdSolver::assemble_and_factor() {
    std::vector<MatrixXd> D(f_.num_groups);
    group_U_.assign(f_.num_groups, MatrixXd());
    for (int g = 0; g < f_.num_groups; ++g) {
        D[g] = MatrixXd::Zero(group_rows_[g].size(), group_rows_[g].size());
        group_U_[g] = MatrixXd::Zero(mb_, group_rows_[g].size());
    }
    MatrixXd B = MatrixXd::Zero(mb_, mb_);

    auto add = [&](int r, int s, double val) {
        int gr = f_.row_group[r], gs = f_.row_group[s];
        int lr = row_local_[r], ls = row_local_[s];
        if (gr < 0 && gs < 0) {
            B(lr, ls) += val;
            if (r != s) B(ls, lr) += val;
        } else if (gr >= 0 && gs >= 0) {
            D[gr](lr, ls) += val;
            if (r != s) D[gr](ls, lr) += val;
        } else if (gr < 0) {
            group_U_[gs](lr, ls) += val;
        } else {
            group_U_[gr](ls, lr) += val;
        }
    };

    // LP contributions.
    for (int i = 0; i < f_.nl; ++i) {
        double h = lp_h_[i];
        const auto& rows = coord_rows_[i];
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b2 = a; b2 < rows.size(); ++b2)
                add(rows[a].first, rows[b2].first, h * rows[a].second * rows[b2].second);
    }

    // PSD contributions.
    for (int k = 0; k < nb_; ++k) {
        int s = f_.psd[k];
        int tk = s * (s + 1) / 2;
        const MatrixXd& W = W_[k];
        if (block_structural_[k]) {
            // Columns of W (x)_s W against unit svec directions, closed form.
            MatrixXd T(tk, tk);
            int col = 0;
            MatrixXd E(s, s);
            std::vector<double> buf(tk);
            for (int p = 0; p < s; ++p)
                for (int q = p; q < s; ++q, ++col) {
                    if (p == q)
                        E = W.col(p) * W.col(p).transpose();
                    else
                        E = (W.col(p) * W.col(q).transpose() +
                             W.col(q) * W.col(p).transpose()) /
                            kSqrt2;
                    svec(E, buf.data());
                    for (int e = 0; e < tk; ++e) T(e, col) = buf[e];
                }
            const auto& erows = block_entry_rows_[k];
            for (int a = 0; a < tk; ++a)
                for (int b2 = a; b2 < tk; ++b2) add(erows[a], erows[b2], T(a, b2));
        } else {
            const auto& touch = block_rows_[k];
            std::vector<std::vector<double>> hv(touch.size());
            for (std::size_t a = 0; a < touch.size(); ++a) {
                VectorXd u = VectorXd::Zero(tk);
                for (const auto& [e, c] : touch[a].second) u[e] = c;
                MatrixXd V = smat(u.data(), s);
                MatrixXd T = W * V * W;
                hv[a].resize(tk);
                svec(T, hv[a].data());
            }
            for (std::size_t a = 0; a < touch.size(); ++a)
                for (std::size_t b2 = a; b2 < touch.size(); ++b2) {
                    double val = 0.0;
                    for (const auto& [e, c] : touch[b2].second) val += c * hv[a][e];
                    add(touch[a].first, touch[b2].first, val);
                }
        }
    }

    // Factor groups, form border Schur complement.
    group_fact_.assign(f_.num_groups, PerturbedLlt());
    group_E_.assign(f_.num_groups, MatrixXd());
    for (int g = 0; g < f_.num_groups; ++g) {
        group_fact_[g].factor(std::move(D[g]));
        if (group_fact_[g].max_piv / group_fact_[g].min_piv > 1e14) ill_conditioned_flag_ = true;
        group_E_[g] = group_fact_[g].L.triangularView<Eigen::Lower>().solve(
            group_U_[g].transpose());
        group_E_[g] =
            group_fact_[g].L.transpose().triangularView<Eigen::Upper>().solve(group_E_[g]);
        B.noalias() -= group_U_[g] * group_E_[g];
    }
    border_fact_.factor(std::move(B));
    if (mb_ > 0 && border_fact_.max_piv / border_fact_.min_piv > 1e14)
        ill_conditioned_flag_ = true;
}

VectorXd HsdSolver::schur_solve(const VectorXd& rhs) const {
    VectorXd out(m_);
    VectorXd rb(mb_);
    for (int i = 0; i < mb_; ++i) rb[i] = rhs[border_rows_[i]];
    std::vector<VectorXd> zg(f_.num_groups);
    for (int g = 0; g < f_.num_groups; ++g) {
        VectorXd rg(group_rows_[g].size());
        for (std::size_t i = 0; i < group_rows_[g].size(); ++i) rg[i] = rhs[group_rows_[g][i]];
        zg[g] = group_fact_[g].solve(rg);
        rb.noalias() -= group_U_[g] * zg[g];
    }
    VectorXd yb = mb_ > 0 ? VectorXd(border_fact_.solve(rb)) : VectorXd(0);
    for (int i = 0; i < mb_; ++i) out[border_rows_[i]] = yb[i];
    for (int g = 0; g < f_.num_groups; ++g) {
        VectorXd yg = zg[g] - group_E_[g] * yb;
        for (std::size_t i = 0; i < group_rows_[g].size(); ++i) out[group_rows_[g][i]] = yg[i];
    }
    return out;
}

VectorXd HsdSolver::schur_solve_refined(const VectorXd& rhs) const {
    VectorXd y = schur_solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
        VectorXd res = rhs - A_mul(H_mul(At_mul(y)));
        if (res.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
        y += schur_solve(res);
    }
    return y;
}

double HsdSolver::step_to_boundary(const VectorXd& v, const VectorXd& dv) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < f_.nl; ++i)
        if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    for (int k = 0; k < nb_; ++k) {
        int s = f_.psd[k], off = f_.psd_offset[k];
        MatrixXd V = smat(v.data() + off, s);
        MatrixXd dV = smat(dv.data() + off, s);
        Eigen::LLT<MatrixXd> lv(V);
        MatrixXd L;
        if (lv.info() == Eigen::Success) {
            L = lv.matrixL();
        } else {
            Eigen::LLT<MatrixXd> lv2(V + 1e-14 * MatrixXd::Identity(s, s));
            L = lv2.matrixL();
        }
        MatrixXd T = L.triangularView<Eigen::Lower>().solve(dV);
        T = L.triangularView<Eigen::Lower>().solve(T.transpose().eval());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
        double lmin = es.eigenvalues().minCoeff();
        if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
}

HsdSolver::Direction HsdSolver::solve_direction(double eta, const VectorXd& rc, double rtk,
                                                const VectorXd& rp, const VectorXd& rd,
                                                double rg, const VectorXd& u1,
                                                const VectorXd& Hc, double chc,
                                                const VectorXd& bAHc) const {
    const VectorXd& c = c_;
    VectorXd Hrd = H_mul(rd);
    VectorXd rhs2 = A_mul(rc + eta * Hrd) - eta * rp;
    VectorXd u2 = schur_solve_refined(rhs2);

    double denom = bAHc.dot(u1) + chc + kappa_ / tau_;
    double rhs_tau = -eta * rg - c.dot(rc) - eta * c.dot(Hrd) - rtk / tau_ - bAHc.dot(u2);
    Direction d;
    d.dtau = rhs_tau / denom;
    d.dlam = u1 * d.dtau + u2;
    d.dz = -At_mul(d.dlam) + c * d.dtau + eta * rd;
    d.dx = -rc - H_mul(d.dz);
    d.dkappa = (-rtk - kappa_ * d.dtau) / tau_;
    return d;
}

ConicSolution HsdSolver::run() {
    // Start at the central point e.
    x_ = VectorXd::Zero(N_);
    z_ = VectorXd::Zero(N_);
    for (int i = 0; i < f_.nl; ++i) x_[i] = z_[i] = 1.0;
    for (int k = 0; k < nb_; ++k) {
        int s = f_.psd[k], off = f_.psd_offset[k];
        MatrixXd I = MatrixXd::Identity(s, s);
        svec(I, x_.data() + off);
        svec(I, z_.data() + off);
    }
    lam_ = VectorXd::Zero(m_);
    tau_ = kappa_ = 1.0;

    const VectorXd& b = b_;
    const VectorXd& c = c_;
    const double bnorm = 1.0 + b.lpNorm<Eigen::Infinity>();
    const double cnorm = 1.0 + c.lpNorm<Eigen::Infinity>();

    ConicSolution best;
    double best_score = std::numeric_limits<double>::infinity();
    const double mu0 = 1.0;

    for (int it = 0; it < st_.max_iterations; ++it) {
        VectorXd rp = A_mul(x_) - b * tau_;
        VectorXd rd = -At_mul(lam_) - z_ + c * tau_;
        double cx = c.dot(x_), by = b.dot(lam_);
        double rg = by - cx - kappa_;
        double mu = (x_.dot(z_) + tau_ * kappa_) / (barrier_ + 1.0);

        double pres = rp.lpNorm<Eigen::Infinity>() / (tau_ * bnorm);
        double dres = rd.lpNorm<Eigen::Infinity>() / (tau_ * cnorm);
        double pobj = cx / tau_, dobj = by / tau_;
        double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        double score = std::max({pres, dres, gap});
        if (score < best_score) {
            best_score = score;
            best.x.resize(f_.var_map.size());
            VectorXd xs = x_ / tau_;
            std::vector<double> xv(xs.data(), xs.data() + N_);
            for (std::size_t v = 0; v < f_.var_map.size(); ++v) best.x[v] = f_.var_value(v, xv);
            best.eq_duals.assign(f_.eq_row.size(), 0.0);
            for (std::size_t i = 0; i < f_.eq_row.size(); ++i)
                best.eq_duals[i] = lam_[f_.eq_row[i]] / tau_ * f_.row_scale[f_.eq_row[i]];
            best.ineq_duals.assign(f_.ineq_row.size(), 0.0);
            for (std::size_t i = 0; i < f_.ineq_row.size(); ++i)
                best.ineq_duals[i] = lam_[f_.ineq_row[i]] / tau_ * f_.row_scale[f_.ineq_row[i]];
            best.objective = f_.obj_sign * pobj;
            best.primal_residual = pres;
            best.dual_residual = dres;
            best.gap = gap;
            best.iterations = it;
        }

        if (pres <= st_.feasibility_tol && dres <= st_.feasibility_tol && gap <= st_.gap_tol) {
            best.status = SolveStatus::Optimal;
            return best;
        }

        // Infeasibility certificates once tau has collapsed.
        if (tau_ <= 1e-10 * std::max(1.0, kappa_) ||
            (mu <= 1e-12 * mu0 && tau_ <= 1e-6 * kappa_)) {
            if (by > 0.0) {
                double cert = (-At_mul(lam_) - z_).lpNorm<Eigen::Infinity>() / by;
                if (cert <= 1e-6) {
                    best.status = SolveStatus::Infeasible;
                    best.objective = 0.0;
                    return best;
                }
            }
            if (cx < 0.0) {
                double cert = A_mul(x_).lpNorm<Eigen::Infinity>() / (-cx);
                if (cert <= 1e-6) {
                    best.status = SolveStatus::Unbounded;
                    best.objective = 0.0;
                    return best;
                }
            }
            break;  // tau collapsed without certificate: numerical failure
        }

        compute_scalings();
        assemble_and_factor();

        VectorXd Hc = H_mul(c);
        VectorXd AHc = A_mul(Hc);
        VectorXd u1 = schur_solve_refined(AHc + b);
        double chc = c.dot(Hc);
        VectorXd bAHc = b - AHc;

        // Predictor.
        Direction aff = solve_direction(1.0, x_, tau_ * kappa_, rp, rd, rg, u1, Hc, chc, bAHc);
        double ap = step_to_boundary(x_, aff.dx);
        double ad = step_to_boundary(z_, aff.dz);
        double at = aff.dtau < 0.0 ? -tau_ / aff.dtau : std::numeric_limits<double>::infinity();
        double ak = aff.dkappa < 0.0 ? -kappa_ / aff.dkappa
                                     : std::numeric_limits<double>::infinity();
        double alpha_aff = std::min({1.0, ap, ad, at, ak});

        double mu_aff = ((x_ + alpha_aff * aff.dx).dot(z_ + alpha_aff * aff.dz) +
                         (tau_ + alpha_aff * aff.dtau) * (kappa_ + alpha_aff * aff.dkappa)) /
                        (barrier_ + 1.0);
        double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Corrector right-hand side.
        VectorXd rc(N_);
        for (int i = 0; i < f_.nl; ++i)
            rc[i] = x_[i] - (sigma * mu - aff.dx[i] * aff.dz[i]) / z_[i];
        for (int k = 0; k < nb_; ++k) {
            int s = f_.psd[k], off = f_.psd_offset[k];
            MatrixXd dX = smat(aff.dx.data() + off, s);
            MatrixXd dZ = smat(aff.dz.data() + off, s);
            MatrixXd dXb = Rinv_[k] * dX * Rinv_[k].transpose();
            MatrixXd dZb = R_[k].transpose() * dZ * R_[k];
            MatrixXd S = 0.5 * (dXb * dZb + dZb * dXb);
            MatrixXd G = -S;
            G.diagonal().array() += sigma * mu;
            const VectorXd& v = vdiag_[k];
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) G(i, j) = 2.0 * G(i, j) / (v[i] + v[j]);
            MatrixXd corr = R_[k] * G * R_[k].transpose();
            VectorXd xblk = x_.segment(off, s * (s + 1) / 2);
            VectorXd cv(s * (s + 1) / 2);
            svec(corr, cv.data());
            rc.segment(off, s * (s + 1) / 2) = xblk - cv;
        }
        double rtk = tau_ * kappa_ - sigma * mu + aff.dtau * aff.dkappa;

        Direction dir =
            solve_direction(1.0 - sigma, rc, rtk, rp, rd, rg, u1, Hc, chc, bAHc);
        ap = step_to_boundary(x_, dir.dx);
        ad = step_to_boundary(z_, dir.dz);
        at = dir.dtau < 0.0 ? -tau_ / dir.dtau : std::numeric_limits<double>::infinity();
        ak = dir.dkappa < 0.0 ? -kappa_ / dir.dkappa : std::numeric_limits<double>::infinity();
        double alpha = st_.step_fraction * std::min({ap, ad, at, ak});
        alpha = std::min(alpha, 1.0);
        if (!std::isfinite(alpha) || alpha <= 1e-14) break;

        x_ += alpha * dir.dx;
        z_ += alpha * dir.dz;
        lam_ += alpha * dir.dlam;
        tau_ += alpha * dir.dtau;
        kappa_ += alpha * dir.dkappa;
    }

    if (ill_conditioned_flag_)
        throw IllConditioned("conic solve: Newton system condition estimate exceeded 1e14 "
                             "(best residual " + std::to_string(best_score) + ")");
    throw NumericalFailure("conic solve: no conclusive status within iteration budget (best "
                           "residual " + std::to_string(best_score) + ")");
}

}  // namespace

ConicSolution solve_conic(const ConicProgram& prog, const SolverSettings& settings) {
    detail::StdForm f = detail::lower_program(prog);
    HsdSolver solver(f, settings);
    ConicSolution sol = solver.run();
    if (sol.status == SolveStatus::Optimal) sol.objective += prog.objective_constant;
    return sol;
}

}  // namespace mosb
