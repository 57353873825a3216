#include "mosb/partition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <Eigen/Dense>

#include "mosb/errors.hpp"

namespace mosb {

namespace {

double norm2(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

/// Is a.x - c >= 0 implied by the box (min over the box >= -tol)?
bool implied_by_box(const Halfspace& h, const std::vector<double>& lo,
                    const std::vector<double>& hi, double tol) {
    double mn = -h.c;
    for (std::size_t i = 0; i < lo.size(); ++i)
        mn += h.a[i] > 0.0 ? h.a[i] * lo[i] : h.a[i] * hi[i];
    return mn >= -tol;
}

}  // namespace

double chebyshev_center(const std::vector<double>& lo, const std::vector<double>& hi,
                        const std::vector<Halfspace>& halfspaces, std::vector<double>& x) {
    const int n = static_cast<int>(lo.size());
    const int dim = n + 1;  // (x, delta)
    // rows: g.(x,delta) >= h
    std::vector<std::vector<double>> G;
    std::vector<double> rhs;
    for (int i = 0; i < n; ++i) {
        std::vector<double> r1(dim, 0.0), r2(dim, 0.0);
        r1[i] = 1.0;
        r1[n] = -1.0;  // x_i - delta >= lo_i
        G.push_back(r1);
        rhs.push_back(lo[i]);
        r2[i] = -1.0;
        r2[n] = -1.0;  // -x_i - delta >= -hi_i
        G.push_back(r2);
        rhs.push_back(-hi[i]);
    }
    for (const auto& h : halfspaces) {
        double nn = norm2(h.a);
        if (nn == 0.0) continue;
        std::vector<double> r(dim, 0.0);
        for (int i = 0; i < n; ++i) r[i] = h.a[i] / nn;
        r[n] = -1.0;
        G.push_back(r);
        rhs.push_back(h.c / nn);
    }
    const int m = static_cast<int>(G.size());

    // Enumerate candidate active sets of size dim (tiny LP, exact and
    // deterministic at these sizes).
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> bx(dim, 0.0);
    std::vector<int> comb(dim);
    std::vector<int> stack;
    std::vector<double> scale(m, 1.0);

    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    std::vector<int> sel(dim);
    // iterative combination enumeration
    std::vector<int> ptr(dim);
    for (int i = 0; i < dim; ++i) ptr[i] = i;
    Eigen::MatrixXd A(dim, dim);
    Eigen::VectorXd bb(dim);
    while (true) {
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) A(i, j) = G[ptr[i]][j];
            bb(i) = rhs[ptr[i]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible()) {
            Eigen::VectorXd sol = lu.solve(bb);
            bool feas = true;
            for (int r = 0; r < m && feas; ++r) {
                double v = -rhs[r];
                for (int j = 0; j < dim; ++j) v += G[r][j] * sol(j);
                if (v < -1e-9 * (1.0 + std::abs(rhs[r]))) feas = false;
            }
            if (feas && sol(n) > best) {
                best = sol(n);
                for (int j = 0; j < dim; ++j) bx[j] = sol(j);
            }
        }
        // next combination
        int i = dim - 1;
        while (i >= 0 && ptr[i] == m - dim + i) --i;
        if (i < 0) break;
        ++ptr[i];
        for (int j = i + 1; j < dim; ++j) ptr[j] = ptr[j - 1] + 1;
    }
    x.assign(bx.begin(), bx.begin() + n);
    return best;
}

namespace {

Cell make_cell(const std::vector<double>& lo, const std::vector<double>& hi,
               const std::vector<Halfspace>& region, int piece, double B) {
    const double tol = 1e-9 * B;
    Cell c;
    c.lo = lo;
    c.hi = hi;
    c.active_piece = piece;
    for (const auto& h : region)
        if (!implied_by_box(h, lo, hi, tol)) c.halfspaces.push_back(h);

    // Representative point: box center when strictly interior to all cuts,
    // otherwise the Chebyshev center.
    const int n = static_cast<int>(lo.size());
    std::vector<double> center(n);
    for (int i = 0; i < n; ++i) center[i] = 0.5 * (lo[i] + hi[i]);
    bool inside = true;
    for (const auto& h : c.halfspaces) {
        double v = -h.c;
        for (int i = 0; i < n; ++i) v += h.a[i] * center[i];
        if (v / norm2(h.a) < tol) inside = false;
    }
    if (inside && !c.halfspaces.empty()) {
        c.rep = center;
    } else if (c.halfspaces.empty()) {
        c.rep = center;
    } else {
        double radius = chebyshev_center(lo, hi, c.halfspaces, c.rep);
        if (radius < tol) c.id = -1;  // empty or sliver: caller drops
    }
    return c;
}

void finalize(Partition& part, const GmpProblem* prob, const std::vector<double>* strikes1,
              double K) {
    // Deterministic ids: lexicographic box lower corner, then piece rank
    // (payoff-zero side first).
    std::stable_sort(part.cells.begin(), part.cells.end(), [](const Cell& a, const Cell& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.active_piece < b.active_piece;
    });
    for (std::size_t i = 0; i < part.cells.size(); ++i) part.cells[i].id = static_cast<int>(i) + 1;

    part.objective_cells.clear();
    for (const auto& c : part.cells)
        if (c.active_piece >= 0) part.objective_cells.push_back(c.id);

    part.option_active.clear();
    if (prob) {
        for (const auto& o : prob->options) {
            std::vector<int> act;
            for (const auto& c : part.cells)
                if (c.rep[o.asset_index - 1] > o.strike) act.push_back(c.id);
            part.option_active.push_back(std::move(act));
        }
    } else if (strikes1) {
        for (double k : *strikes1) {
            std::vector<int> act;
            for (const auto& c : part.cells)
                if (c.rep[0] > k) act.push_back(c.id);
            part.option_active.push_back(std::move(act));
        }
    }
    (void)K;
}

}  // namespace

Partition segment_univariate(const std::vector<double>& strikes, double K, double B) {
    for (double k : strikes)
        if (k >= B) throw ValidationError("strike >= B in segmentation");
    if (K < 0.0 || K >= B) throw ValidationError("need 0 <= K < B");
    std::set<double> cutset(strikes.begin(), strikes.end());
    cutset.insert(K);
    std::vector<double> cuts;
    for (double c : cutset)
        if (c > 0.0 && c < B) cuts.push_back(c);

    Partition part;
    part.n = 1;
    double lo = 0.0;
    auto push = [&](double a, double b) {
        if (b - a < 1e-9 * B) return;  // zero-width cell dropped
        Cell c;
        c.lo = {a};
        c.hi = {b};
        c.rep = {0.5 * (a + b)};
        c.active_piece = (a >= K - 1e-12 * B) ? 0 : -1;
        part.cells.push_back(std::move(c));
    };
    for (double c : cuts) {
        push(lo, c);
        lo = c;
    }
    push(lo, B);
    finalize(part, nullptr, &strikes, K);
    return part;
}

Partition build_cells(const GmpProblem& p, std::int64_t max_cells) {
    const int n = p.n;
    const double B = p.box_bound;

    // Per-asset cuts at strikes inside (0, B).
    std::vector<std::vector<double>> axis_cuts(n);
    for (const auto& o : p.options) {
        if (o.strike > 0.0 && o.strike < B) axis_cuts[o.asset_index - 1].push_back(o.strike);
    }
    std::int64_t boxes = 1;
    for (int i = 0; i < n; ++i) {
        std::sort(axis_cuts[i].begin(), axis_cuts[i].end());
        axis_cuts[i].erase(std::unique(axis_cuts[i].begin(), axis_cuts[i].end()),
                           axis_cuts[i].end());
        boxes *= static_cast<std::int64_t>(axis_cuts[i].size()) + 1;
        if (boxes > max_cells) throw PartitionOverflow("grid box count exceeds limit");
    }

    auto pieces = payoff_pieces(p.payoff, n);
    auto zero_region = payoff_zero_region(p.payoff, n);
    if (boxes * static_cast<std::int64_t>(pieces.size() + 1) > max_cells)
        throw PartitionOverflow("cell count bound exceeds limit");

    Partition part;
    part.n = n;

    std::vector<int> box_idx(n, 0);
    std::vector<double> lo(n), hi(n);
    while (true) {
        for (int i = 0; i < n; ++i) {
            const auto& cuts = axis_cuts[i];
            lo[i] = box_idx[i] == 0 ? 0.0 : cuts[box_idx[i] - 1];
            hi[i] = box_idx[i] == static_cast<int>(cuts.size()) ? B : cuts[box_idx[i]];
        }
        Cell zc = make_cell(lo, hi, zero_region, -1, B);
        if (zc.id != -1) part.cells.push_back(std::move(zc));
        for (const auto& piece : pieces) {
            Cell c = make_cell(lo, hi, piece.region, piece.index, B);
            if (c.id != -1) part.cells.push_back(std::move(c));
        }
        int i = n - 1;
        while (i >= 0 && box_idx[i] == static_cast<int>(axis_cuts[i].size())) {
            box_idx[i] = 0;
            --i;
        }
        if (i < 0) break;
        ++box_idx[i];
    }
    finalize(part, &p, nullptr, p.payoff.strike);
    return part;
}

std::vector<Polynomial> cell_localizers(const Cell& c) {
    const int n = static_cast<int>(c.lo.size());
    std::vector<Polynomial> out;
    for (int i = 0; i < n; ++i) {
        Polynomial xi = Polynomial::variable(n, i);
        Polynomial g = (Polynomial::constant(n, c.hi[i]) - xi) *
                       (xi - Polynomial::constant(n, c.lo[i]));
        out.push_back(std::move(g));
    }
    for (const auto& h : c.halfspaces) {
        Polynomial g = Polynomial::constant(n, -h.c);
        for (int i = 0; i < n; ++i)
            if (h.a[i] != 0.0) g = g + Polynomial::variable(n, i) * h.a[i];
        out.push_back(std::move(g));
    }
    return out;
}

void write_cells_csv(const Partition& part, std::ostream& os) {
    os << "id";
    for (int i = 0; i < part.n; ++i) os << ",lo" << i + 1 << ",hi" << i + 1;
    os << ",piece,halfspaces,active_options\n";
    for (const auto& c : part.cells) {
        os << c.id;
        char buf[64];
        for (int i = 0; i < part.n; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.9g,%.9g", c.lo[i], c.hi[i]);
            os << buf;
        }
        os << "," << c.active_piece << ",\"";
        for (std::size_t h = 0; h < c.halfspaces.size(); ++h) {
            if (h) os << ";";
            for (int i = 0; i < part.n; ++i) {
                std::snprintf(buf, sizeof(buf), "%s%.9g", i ? " " : "", c.halfspaces[h].a[i]);
                os << buf;
            }
            std::snprintf(buf, sizeof(buf), " >= %.9g", c.halfspaces[h].c);
            os << buf;
        }
        os << "\",\"";
        bool first = true;
        for (std::size_t j = 0; j < part.option_active.size(); ++j) {
            if (std::binary_search(part.option_active[j].begin(), part.option_active[j].end(),
                                   c.id)) {
                if (!first) os << " ";
                os << "J" << j + 1;
                first = false;
            }
        }
        os << "\"\n";
    }
}

}  // namespace mosb
