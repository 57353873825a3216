#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mosb/errors.hpp"

namespace mosb {

/// Exponent vector alpha of a monomial x^alpha.
struct MultiIndex {
    std::vector<int> e;

    MultiIndex() = default;
    explicit MultiIndex(int n) : e(n, 0) {}
    MultiIndex(std::initializer_list<int> v) : e(v) {}

    int vars() const { return static_cast<int>(e.size()); }
    int degree() const;
    MultiIndex operator+(const MultiIndex& o) const;
    bool operator==(const MultiIndex& o) const { return e == o.e; }
};

/// Graded lexicographic order: degree first, then lexicographically
/// larger exponent vector first (so x1 precedes x2, x1^2 precedes x1*x2).
bool grlex_less(const MultiIndex& a, const MultiIndex& b);

struct GrlexLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const { return grlex_less(a, b); }
};

/// s(r) = C(n+r, r), the number of monomials of degree <= r in n variables.
std::int64_t monomial_count(int n, int r);

/// All multi-indices with |alpha| <= t in grlex order, with index lookup.
class MonomialBasis {
public:
    MonomialBasis(int n, int t);

    int vars() const { return n_; }
    int max_degree() const { return t_; }
    int size() const { return static_cast<int>(mons_.size()); }
    const MultiIndex& operator[](int i) const { return mons_[i]; }
    const std::vector<MultiIndex>& monomials() const { return mons_; }
    int index_of(const MultiIndex& m) const;  // throws DegreeOverflow if |m| > t

private:
    int n_, t_;
    std::vector<MultiIndex> mons_;
    std::map<MultiIndex, int, GrlexLess> index_;
};

/// Sparse multivariate polynomial with double coefficients.
class Polynomial {
public:
    Polynomial() : n_(0) {}
    explicit Polynomial(int n) : n_(n) {}

    static Polynomial constant(int n, double c);
    static Polynomial variable(int n, int i);

    int vars() const { return n_; }
    int degree() const;
    bool is_zero() const { return terms_.empty(); }
    const std::map<MultiIndex, double, GrlexLess>& terms() const { return terms_; }

    double coefficient(const MultiIndex& m) const;
    void set(const MultiIndex& m, double c);
    void add_term(const MultiIndex& m, double c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;

    double eval(std::span<const double> x) const;

    /// p(x) -> p(s*x): multiplies each coefficient by s^|alpha|.
    Polynomial scale_variables(double s) const;

    /// (x1^2 + ... + xn^2)^(d/2) for even d.
    static Polynomial euclidean_norm_power(int n, int d);

private:
    static constexpr double kDropTol = 1e-14;
    int n_;
    std::map<MultiIndex, double, GrlexLess> terms_;
};

/// Truncated moment sequence y = {y_alpha : |alpha| <= t}.
class MomentVector {
public:
    MomentVector(int n, int t);

    int vars() const { return n_; }
    int truncation() const { return t_; }
    const MonomialBasis& basis() const { return basis_; }
    double operator[](const MultiIndex& m) const { return y_[basis_.index_of(m)]; }
    double& operator[](const MultiIndex& m) { return y_[basis_.index_of(m)]; }
    const std::vector<double>& values() const { return y_; }

    /// Moments of sum_j w_j * delta_{atoms[j]}.
    static MomentVector of_atoms(int n, int t, const std::vector<std::vector<double>>& atoms,
                                 const std::vector<double>& weights);

private:
    int n_, t_;
    MonomialBasis basis_;
    std::vector<double> y_;
};

/// Dense symmetric matrix, rows/columns indexed by monomials in grlex order.
struct SymMatrix {
    int order = 0;
    Eigen::MatrixXd m;

    explicit SymMatrix(int ord) : order(ord), m(Eigen::MatrixXd::Zero(ord, ord)) {}
    double min_eigenvalue() const;
};

/// Riesz functional L_y(f) = sum_alpha f_alpha y_alpha.
double riesz_apply(const Polynomial& f, const MomentVector& y);

/// (M_r(y))_{ab} = y_{a+b}, a,b in N^n_r.
SymMatrix moment_matrix(const MomentVector& y, int r);

/// (M_r(g*y))_{ab} = sum_g g_c y_{a+b+c}.
SymMatrix localizing_matrix(const Polynomial& g, const MomentVector& y, int r);

}  // namespace mosb
