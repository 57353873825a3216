#include "mosb/poly.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace mosb {

int MultiIndex::degree() const {
    int d = 0;
    for (int v : e) d += v;
    return d;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
    MultiIndex r(vars());
    for (int i = 0; i < vars(); ++i) r.e[i] = e[i] + o.e[i];
    return r;
}

bool grlex_less(const MultiIndex& a, const MultiIndex& b) {
    int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    // within a degree class, lexicographically larger vector comes first
    return a.e > b.e;
}

std::int64_t monomial_count(int n, int r) {
    if (n < 1 || r < 0) throw InvalidInput("monomial_count: need n >= 1, r >= 0");
    if (n + r > 60) throw OverflowError("monomial_count: n + r > 60 exceeds 64-bit safe range");
    std::int64_t c = 1;
    for (int i = 1; i <= std::min(n, r); ++i) c = c * (n + r - i + 1) / i;
    // C(n+r, min(n,r)) computed with exact integer steps
    return c;
}

namespace {

void enumerate_degree(int slots, int rem, std::vector<int>& prefix,
                      std::vector<MultiIndex>& out) {
    if (slots == 1) {
        MultiIndex m;
        m.e = prefix;
        m.e.push_back(rem);
        out.push_back(std::move(m));
        return;
    }
    for (int e = rem; e >= 0; --e) {
        prefix.push_back(e);
        enumerate_degree(slots - 1, rem - e, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

MonomialBasis::MonomialBasis(int n, int t) : n_(n), t_(t) {
    if (n < 1 || t < 0) throw InvalidInput("MonomialBasis: need n >= 1, t >= 0");
    for (int d = 0; d <= t; ++d) {
        std::vector<int> prefix;
        enumerate_degree(n, d, prefix, mons_);
    }
    for (int i = 0; i < size(); ++i) index_[mons_[i]] = i;
}

int MonomialBasis::index_of(const MultiIndex& m) const {
    auto it = index_.find(m);
    if (it == index_.end())
        throw DegreeOverflow("monomial degree " + std::to_string(m.degree()) +
                             " exceeds truncation " + std::to_string(t_));
    return it->second;
}

Polynomial Polynomial::constant(int n, double c) {
    Polynomial p(n);
    p.add_term(MultiIndex(n), c);
    return p;
}

Polynomial Polynomial::variable(int n, int i) {
    Polynomial p(n);
    MultiIndex m(n);
    m.e[i] = 1;
    p.add_term(m, 1.0);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

double Polynomial::coefficient(const MultiIndex& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set(const MultiIndex& m, double c) {
    if (std::abs(c) < kDropTol)
        terms_.erase(m);
    else
        terms_[m] = c;
}

void Polynomial::add_term(const MultiIndex& m, double c) {
    auto it = terms_.find(m);
    double v = (it == terms_.end() ? 0.0 : it->second) + c;
    if (std::abs(v) < kDropTol) {
        if (it != terms_.end()) terms_.erase(it);
    } else {
        terms_[m] = v;
    }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r(n_);
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) r.add_term(ma + mb, ca * cb);
    return r;
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) r.add_term(m, c * s);
    return r;
}

double Polynomial::eval(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c;
        for (int i = 0; i < vars(); ++i)
            for (int k = 0; k < m.e[i]; ++k) t *= x[i];
        s += t;
    }
    return s;
}

Polynomial Polynomial::scale_variables(double s) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) r.add_term(m, c * std::pow(s, m.degree()));
    return r;
}

Polynomial Polynomial::euclidean_norm_power(int n, int d) {
    if (d % 2 != 0 || d < 0) throw InvalidInput("euclidean_norm_power: d must be even");
    Polynomial sq(n);
    for (int i = 0; i < n; ++i) {
        MultiIndex m(n);
        m.e[i] = 2;
        sq.add_term(m, 1.0);
    }
    Polynomial r = Polynomial::constant(n, 1.0);
    for (int k = 0; k < d / 2; ++k) r = r * sq;
    return r;
}

MomentVector::MomentVector(int n, int t) : n_(n), t_(t), basis_(n, t), y_(basis_.size(), 0.0) {}

MomentVector MomentVector::of_atoms(int n, int t, const std::vector<std::vector<double>>& atoms,
                                    const std::vector<double>& weights) {
    MomentVector y(n, t);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        for (int i = 0; i < y.basis_.size(); ++i) {
            const MultiIndex& m = y.basis_[i];
            double t0 = weights[j];
            for (int v = 0; v < n; ++v)
                for (int k = 0; k < m.e[v]; ++k) t0 *= atoms[j][v];
            y.y_[i] += t0;
        }
    }
    return y;
}

double SymMatrix::min_eigenvalue() const {
    if (order == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double riesz_apply(const Polynomial& f, const MomentVector& y) {
    if (f.vars() != y.vars()) throw InvalidInput("riesz_apply: variable count mismatch");
    if (f.degree() > y.truncation())
        throw DegreeOverflow("riesz_apply: deg(f) exceeds moment truncation");
    double s = 0.0;
    for (const auto& [m, c] : f.terms()) s += c * y[m];
    return s;
}

SymMatrix moment_matrix(const MomentVector& y, int r) {
    if (2 * r > y.truncation()) throw DegreeOverflow("moment_matrix: 2r exceeds truncation");
    MonomialBasis rows(y.vars(), r);
    SymMatrix M(rows.size());
    for (int a = 0; a < rows.size(); ++a)
        for (int b = a; b < rows.size(); ++b) {
            double v = y[rows[a] + rows[b]];
            M.m(a, b) = v;
            M.m(b, a) = v;
        }
    return M;
}

SymMatrix localizing_matrix(const Polynomial& g, const MomentVector& y, int r) {
    if (2 * r + g.degree() > y.truncation())
        throw DegreeOverflow("localizing_matrix: 2r + deg(g) exceeds truncation");
    MonomialBasis rows(y.vars(), r);
    SymMatrix M(rows.size());
    for (int a = 0; a < rows.size(); ++a)
        for (int b = a; b < rows.size(); ++b) {
            double v = 0.0;
            for (const auto& [m, c] : g.terms()) v += c * y[rows[a] + rows[b] + m];
            M.m(a, b) = v;
            M.m(b, a) = v;
        }
    return M;
}

}  // namespace mosb
