#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ipsinv/core.hpp"
#include "ipsinv/scalar.hpp"

namespace ipsinv {

template <class S>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, const S& fill = S(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<S>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    for (const auto& r : init) {
      if (r.size() != cols_) throw Error("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }
  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  S& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  std::vector<S> apply(const std::vector<S>& x) const {
    std::vector<S> y(rows_, S(0));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }
  std::vector<S> apply_left(const std::vector<S>& x) const {
    std::vector<S> y(cols_, S(0));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[j] += x[i] * (*this)(i, j);
    return y;
  }
  template <class S2>
  DenseMatrix<S2> convert() const {
    DenseMatrix<S2> r(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(i, j) = scalar_cast<S2>((*this)(i, j));
    return r;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<S> data_;
};

enum class SolutionKind { unique, affine, empty };

/// Solution set {particular + span(basis)} of A x = b.
template <class S>
struct SolutionSet {
  SolutionKind kind = SolutionKind::empty;
  std::vector<S> particular;
  std::vector<std::vector<S>> basis;

  std::size_t dimension() const { return basis.size(); }
  std::vector<S> point(const std::vector<S>& theta) const {
    std::vector<S> x = particular;
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += theta[k] * basis[k][i];
    return x;
  }
};

namespace detail {

template <class S>
double max_abs(const DenseMatrix<S>& a) {
  double m = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(to_double(a(i, j))));
  return m;
}

/// In-place reduced row echelon form; returns pivot columns.
template <class S>
std::vector<std::size_t> rref(DenseMatrix<S>& a, std::size_t ncols, const Tolerance& tol) {
  std::vector<std::size_t> pivots;
  double scale = std::max(1.0, max_abs(a));
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncols && r < a.rows(); ++c) {
    std::size_t best = a.rows();
    if constexpr (is_exact_v<S>) {
      for (std::size_t i = r; i < a.rows(); ++i)
        if (a(i, c) != 0) {
          best = i;
          break;
        }
    } else {
      double bv = tol.abs * scale;
      for (std::size_t i = r; i < a.rows(); ++i)
        if (std::fabs(a(i, c)) > bv) {
          bv = std::fabs(a(i, c));
          best = i;
        }
    }
    if (best == a.rows()) continue;
    if (best != r)
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(r, j), a(best, j));
    S piv = a(r, c);
    for (std::size_t j = 0; j < a.cols(); ++j) a(r, j) /= piv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || is_zero<S>(a(i, c), Tolerance{0.0})) continue;
      S f = a(i, c);
      for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace detail

/// Gaussian elimination: exact over rationals, pivot tolerance in float mode.
template <class S>
SolutionSet<S> solve_linear(const DenseMatrix<S>& A, const std::vector<S>& b, const Tolerance& tol = {}) {
  if (b.size() != A.rows()) throw Error("solve_linear: dimension mismatch");
  std::size_t n = A.cols();
  DenseMatrix<S> aug(A.rows(), n + 1);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = A(i, j);
    aug(i, n) = b[i];
  }
  auto pivots = detail::rref(aug, n, tol);
  SolutionSet<S> out;
  double bscale = 1.0;
  for (const auto& v : b) bscale = std::max(bscale, std::fabs(to_double(v)));
  for (std::size_t i = pivots.size(); i < aug.rows(); ++i)
    if (!is_zero<S>(aug(i, n), tol, bscale)) return out;  // inconsistent
  out.particular.assign(n, S(0));
  std::vector<char> is_pivot(n, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    out.particular[pivots[r]] = aug(r, n);
    is_pivot[pivots[r]] = 1;
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<S> v(n, S(0));
    v[f] = S(1);
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -aug(r, f);
    out.basis.push_back(std::move(v));
  }
  out.kind = out.basis.empty() ? SolutionKind::unique : SolutionKind::affine;
  return out;
}

template <class S>
std::vector<std::vector<S>> nullspace(const DenseMatrix<S>& A, const Tolerance& tol = {}) {
  return solve_linear(A, std::vector<S>(A.rows(), S(0)), tol).basis;
}

template <class S>
std::size_t rank(const DenseMatrix<S>& A, const Tolerance& tol = {}) {
  DenseMatrix<S> c = A;
  return detail::rref(c, c.cols(), tol).size();
}

/// Transition matrix of the chain on length-max(m,1) blocks induced by a memory-m kernel.
template <class S>
DenseMatrix<S> block_transition_matrix(const MarkovKernel<S>& M) {
  int k = M.kappa(), m = M.memory();
  if (m == 0) {
    DenseMatrix<S> P(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) P(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = M(0, b);
    return P;
  }
  WordCode nb = ipow(k, m);
  DenseMatrix<S> P(nb, nb);
  for (WordCode a = 0; a < nb; ++a)
    for (int y = 0; y < k; ++y) {
      WordCode b = (a * static_cast<WordCode>(k) + static_cast<WordCode>(y)) % nb;
      P(a, b) += M(a, y);
    }
  return P;
}

/// Unique stationary law of the block chain; errors when it is not unique.
template <class S>
StationaryLaw<S> stationary_distribution(const MarkovKernel<S>& M, const Tolerance& tol = {}) {
  if (M.memory() == 0) return StationaryLaw<S>::product(M.row(0), tol);
  DenseMatrix<S> P = block_transition_matrix(M);
  std::size_t n = P.rows();
  DenseMatrix<S> A(n + 1, n);
  std::vector<S> b(n + 1, S(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(j, i) = P(i, j) - (i == j ? S(1) : S(0));
  for (std::size_t j = 0; j < n; ++j) A(n, j) = S(1);
  b[n] = S(1);
  auto sol = solve_linear(A, b, tol);
  if (sol.kind == SolutionKind::empty) throw Error("stationary_distribution: no solution");
  if (sol.kind == SolutionKind::affine)
    throw Error("stationary_distribution: kernel is reducible, stationary law is not unique");
  for (auto& v : sol.particular)
    if (v < 0) {
      if (!is_zero<S>(v, tol)) throw Error("stationary_distribution: negative entry");
      v = S(0);
    }
  return StationaryLaw<S>(M, sol.particular, tol);
}

/// Perron pair with l.1 = 1 and l.r = 1.
template <class S>
struct EigenPair {
  S eigenvalue;
  std::vector<S> left;
  std::vector<S> right;
};

namespace detail {

template <class S>
bool irreducible_pattern(const DenseMatrix<S>& A) {
  std::size_t n = A.rows();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = A(i, j) > 0 || i == j;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!reach[i][j]) return false;
  return true;
}

inline std::vector<double> power_iterate(const DenseMatrix<double>& B, bool left) {
  std::size_t n = B.rows();
  std::vector<double> v(n, 1.0);
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> w = left ? B.apply_left(v) : B.apply(v);
    double s = 0;
    for (double x : w) s += x;
    for (double& x : w) x /= s;
    double diff = 0, mag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      diff = std::max(diff, std::fabs(w[i] - v[i]));
      mag = std::max(mag, std::fabs(w[i]));
    }
    v = std::move(w);
    if (diff <= 1e-13 * mag) break;
  }
  return v;
}

// One refinement solve of (A - lambda I) v = 0 with the last equation replaced by sum(v) = 1.
inline std::vector<double> refine(const DenseMatrix<double>& A, double lambda, std::vector<double> v) {
  std::size_t n = A.rows();
  DenseMatrix<double> K(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) K(i, j) = A(i, j) - (i == j ? lambda : 0.0);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) K(n - 1, j) = 1.0;
  rhs[n - 1] = 1.0;
  auto sol = solve_linear(K, rhs, Tolerance{1e-15});
  if (sol.kind != SolutionKind::unique) return v;
  for (double x : sol.particular)
    if (!(x > 0)) return v;
  return sol.particular;
}

}  // namespace detail

/// Float Perron pair by power iteration on A + I (aperiodic whenever A is irreducible).
inline EigenPair<double> perron_pair(const DenseMatrix<double>& A) {
  std::size_t n = A.rows();
  if (n == 0 || A.cols() != n) throw Error("perron_pair: square nonempty matrix required");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (A(i, j) < 0) throw Error("perron_pair: negative entry");
  if (!detail::irreducible_pattern(A)) throw Error("perron_pair: matrix is reducible");
  DenseMatrix<double> B = A;
  for (std::size_t i = 0; i < n; ++i) B(i, i) += 1.0;
  std::vector<double> r = detail::power_iterate(B, false);
  std::vector<double> l = detail::power_iterate(B, true);
  std::vector<double> Ar = A.apply(r);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += l[i] * Ar[i];
    den += l[i] * r[i];
  }
  double lambda = num / den;
  if (n > 1) {
    r = detail::refine(A, lambda, r);
    l = detail::refine(A.transpose(), lambda, l);
  }
  double ls = 0;
  for (double x : l) ls += x;
  for (double& x : l) x /= ls;
  double lr = 0;
  for (std::size_t i = 0; i < n; ++i) lr += l[i] * r[i];
  for (double& x : r) x /= lr;
  return {lambda, l, r};
}

/// Exact Perron pair when the eigen-data is rational: the float eigenvalue is rounded
/// (denominator <= max_den) and confirmed by an exact nullspace computation.
inline std::optional<EigenPair<Rational>> exact_perron_pair(const DenseMatrix<Rational>& A,
                                                            std::int64_t max_den = 1000000) {
  EigenPair<double> f = perron_pair(A.convert<double>());
  Rational lambda = best_rational_approximation(f.eigenvalue, max_den);
  std::size_t n = A.rows();
  DenseMatrix<Rational> K = A;
  for (std::size_t i = 0; i < n; ++i) K(i, i) -= lambda;
  auto rn = nullspace(K);
  auto ln = nullspace(K.transpose());
  if (rn.size() != 1 || ln.size() != 1) return std::nullopt;
  std::vector<Rational> r = rn[0], l = ln[0];
  if (r[0] < 0)
    for (auto& x : r) x = -x;
  if (l[0] < 0)
    for (auto& x : l) x = -x;
  for (std::size_t i = 0; i < n; ++i)
    if (!(r[i] > 0) || !(l[i] > 0)) return std::nullopt;
  Rational ls = 0;
  for (const auto& x : l) ls += x;
  for (auto& x : l) x /= ls;
  Rational lr = 0;
  for (std::size_t i = 0; i < n; ++i) lr += l[i] * r[i];
  for (auto& x : r) x /= lr;
  return EigenPair<Rational>{lambda, l, r};
}

}  // namespace ipsinv
