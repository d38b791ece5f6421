#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ipsinv/core.hpp"
#include "ipsinv/criteria.hpp"
#include "ipsinv/numerics.hpp"

namespace ipsinv {

inline constexpr std::int64_t kRoundingDenominator = 1000000;

/// Probability on E^3 indexed by encode({a,b,c}).
template <class S>
struct TripleMeasure {
  int kappa = 2;
  std::vector<S> nu;

  const S& operator()(Letter a, Letter b, Letter c) const { return nu[index(a, b, c)]; }
  std::size_t index(Letter a, Letter b, Letter c) const {
    std::size_t k = static_cast<std::size_t>(kappa);
    return (static_cast<std::size_t>(a) * k + static_cast<std::size_t>(b)) * k + static_cast<std::size_t>(c);
  }
  bool positive() const {
    return std::all_of(nu.begin(), nu.end(), [](const S& v) { return v > 0; });
  }
};

/// nu_{abc} = M_ab M_bc M_ca / Tr(M^3).
template <class S>
TripleMeasure<S> triple_from_kernel(const MarkovKernel<S>& M) {
  if (M.memory() != 1) throw Error("triple_from_kernel: memory-1 kernel required");
  int k = M.kappa();
  TripleMeasure<S> t{k, std::vector<S>(static_cast<std::size_t>(k * k * k), S(0))};
  S trace(0);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) {
        S v = M(a, b) * M(b, c) * M(c, a);
        t.nu[t.index(a, b, c)] = v;
        trace += v;
      }
  if (trace == 0) throw Error("triple_from_kernel: Tr(M^3) = 0");
  for (auto& v : t.nu) v /= trace;
  return t;
}

template <class S>
struct TripleFamily {
  int kappa = 2;
  SolutionSet<S> solutions;
  /// The Cycle_3 equations are implied by rotation invariance: every rotation-invariant probability solves them.
  bool all = false;
};

namespace detail {

inline std::size_t rotation_orbit_count(int kappa) {
  std::size_t n = 0;
  for (int a = 0; a < kappa; ++a)
    for (int b = 0; b < kappa; ++b)
      for (int c = 0; c < kappa; ++c) {
        // Count the lexicographically smallest rotation only.
        std::array<int, 3> w{a, b, c}, r1{b, c, a}, r2{c, a, b};
        if (w <= r1 && w <= r2) ++n;
      }
  return n;
}

template <class F>
void for_each_combination(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
    if (pos == k) {
      f(idx);
      return;
    }
    for (std::size_t i = start; i + (k - pos) <= n; ++i) {
      idx[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
}

template <class S>
bool same_point(const std::vector<S>& a, const std::vector<S>& b, const Tolerance& tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!approx_equal<S>(a[i], b[i], tol)) return false;
  return true;
}

/// Vertices of {x in the affine family : x[i] >= 0 for i in rows}; the family must be bounded there.
template <class S>
std::vector<std::vector<S>> polytope_vertices(const SolutionSet<S>& sol, const std::vector<std::size_t>& rows,
                                              const Tolerance& tol) {
  std::vector<std::vector<S>> out;
  const std::size_t d = sol.dimension();
  if (sol.kind == SolutionKind::empty) return out;
  auto feasible = [&](const std::vector<S>& x) {
    for (std::size_t i : rows)
      if (x[i] < 0 && !is_zero<S>(x[i], tol)) return false;
    return true;
  };
  auto push = [&](std::vector<S> x) {
    for (auto& v : x)
      if (is_zero<S>(v, tol)) v = S(0);
    for (const auto& y : out)
      if (same_point(x, y, tol)) return;
    out.push_back(std::move(x));
  };
  if (d == 0) {
    if (feasible(sol.particular)) push(sol.particular);
    return out;
  }
  for_each_combination(rows.size(), d, [&](const std::vector<std::size_t>& pick) {
    DenseMatrix<S> A(d, d);
    std::vector<S> b(d);
    for (std::size_t r = 0; r < d; ++r) {
      std::size_t i = rows[pick[r]];
      for (std::size_t c = 0; c < d; ++c) A(r, c) = sol.basis[c][i];
      b[r] = -sol.particular[i];
    }
    auto th = solve_linear(A, b, tol);
    if (th.kind != SolutionKind::unique) return;
    auto x = sol.point(th.particular);
    if (feasible(x)) push(std::move(x));
  });
  return out;
}

template <class S>
std::vector<S> centroid(const std::vector<std::vector<S>>& pts) {
  std::vector<S> c(pts.front().size(), S(0));
  for (const auto& p : pts)
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += p[i];
  for (auto& v : c) v /= S(static_cast<int>(pts.size()));
  return c;
}

template <class S>
S from_double(double x) {
  if constexpr (is_exact_v<S>)
    return best_rational_approximation(x, kRoundingDenominator);
  else
    return x;
}

}  // namespace detail

/// Linear system Cycle_3 == 0 in nu with rotation invariance and normalization.
template <class S>
TripleFamily<S> solve_cycle3_system(const JumpRateMatrix<S>& T, const Tolerance& tol = {}) {
  if (T.range() != 2) throw Error("solve_cycle3_system: range L = 2 required");
  const int k = T.kappa();
  const std::size_t n = static_cast<std::size_t>(k * k * k);
  TripleMeasure<S> ix{k, {}};
  auto pair = [&](Letter a, Letter b) { return static_cast<WordCode>(a * k + b); };
  std::vector<std::vector<S>> cycle_rows, other_rows;
  std::vector<S> other_rhs;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) {
        std::vector<S> row(n, S(0));
        // Windows (a,b), (b,c), (c,a); the third letter of each rotation is outside the window.
        const std::array<std::array<Letter, 3>, 3> rot{{{a, b, c}, {b, c, a}, {c, a, b}}};
        for (const auto& r : rot) {
          for (const auto& [from, rate] : T.incoming(pair(r[0], r[1]))) {
            Letter u = static_cast<Letter>(from / static_cast<WordCode>(k)), v = static_cast<Letter>(from % static_cast<WordCode>(k));
            row[ix.index(r[2], u, v)] += rate;
          }
          row[ix.index(a, b, c)] -= T.exit_rate(pair(r[0], r[1]));
        }
        cycle_rows.push_back(std::move(row));
        std::vector<S> rr(n, S(0));
        rr[ix.index(a, b, c)] += S(1);
        rr[ix.index(b, c, a)] -= S(1);
        other_rows.push_back(std::move(rr));
        other_rhs.push_back(S(0));
      }
  other_rows.emplace_back(n, S(1));
  other_rhs.push_back(S(1));
  DenseMatrix<S> A(cycle_rows.size() + other_rows.size(), n);
  std::vector<S> rhs(A.rows(), S(0));
  std::size_t r = 0;
  for (const auto& row : cycle_rows) {
    for (std::size_t j = 0; j < n; ++j) A(r, j) = row[j];
    ++r;
  }
  for (std::size_t i = 0; i < other_rows.size(); ++i, ++r) {
    for (std::size_t j = 0; j < n; ++j) A(r, j) = other_rows[i][j];
    rhs[r] = other_rhs[i];
  }
  TripleFamily<S> fam;
  fam.kappa = k;
  fam.solutions = solve_linear(A, rhs, tol);
  fam.all = fam.solutions.kind != SolutionKind::empty &&
            fam.solutions.dimension() + 1 == detail::rotation_orbit_count(k);
  return fam;
}

template <class S>
struct Candidate {
  MarkovKernel<S> kernel;
  StationaryLaw<S> law;
  /// Float eigen step whose rounding failed the exact re-check.
  bool numeric = false;
  bool ncycle3 = false;
  bool line_invariant = false;
  std::optional<Word> witness;
  std::string origin;
};

template <class S>
struct CandidateSet {
  std::vector<Candidate<S>> candidates;
  bool exhausted = false;
  /// Every positive kernel lies in S_3(T).
  bool family_all = false;
  std::size_t family_dimension = 0;
  std::size_t nu_samples = 0;
  std::vector<std::string> notes;
};

namespace detail {

template <class S>
std::optional<MarkovKernel<S>> kernel_from_eigen(const TripleMeasure<S>& nu, const std::vector<std::vector<S>>& right,
                                                 const Tolerance& tol) {
  const int k = nu.kappa;
  std::vector<std::vector<S>> rows;
  for (int a = 0; a < k; ++a) {
    std::vector<S> row(static_cast<std::size_t>(k), S(0));
    S sum(0);
    for (int b = 0; b < k; ++b) {
      S v(0);
      for (int x = 0; x < k; ++x) v += nu(a, b, x) * right[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)];
      if (!(v > 0)) return std::nullopt;
      row[static_cast<std::size_t>(b)] = v;
      sum += v;
    }
    for (auto& v : row) v /= sum;
    rows.push_back(std::move(row));
  }
  return MarkovKernel<S>(k, 1, std::move(rows), tol);
}

template <class S>
bool reproduces(const MarkovKernel<S>& M, const TripleMeasure<S>& nu, const Tolerance& tol) {
  auto t = triple_from_kernel(M);
  return same_point(t.nu, nu.nu, tol);
}

inline DenseMatrix<double> reduced_n(const TripleMeasure<double>& nu, int a) {
  std::size_t k = static_cast<std::size_t>(nu.kappa);
  DenseMatrix<double> N(k, k);
  for (int x = 0; x < nu.kappa; ++x)
    for (int y = 0; y < nu.kappa; ++y)
      N(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = nu(a, x, y) / nu(a, x, a);
  return N;
}

}  // namespace detail

/// Kernels M with nu = nu(M). N_a is used without its cube-root factor: nu_aaa^{1/3} N~_a has the
/// same eigenvectors, and equal main eigenvalues reduce to equal nu_aaa * lambda~_a^3.
template <class S>
CandidateSet<S> candidate_kernels(const JumpRateMatrix<S>& T, const TripleMeasure<S>& nu, const Tolerance& tol = {}) {
  if (T.kappa() != nu.kappa) throw Error("candidate_kernels: alphabet mismatch");
  if (nu.nu.size() != static_cast<std::size_t>(nu.kappa * nu.kappa * nu.kappa)) throw Error("nu has wrong size");
  const int k = nu.kappa;
  CandidateSet<S> out;
  out.nu_samples = 1;
  if (!nu.positive()) {
    out.notes.push_back("nu is not strictly positive");
    return out;
  }
  auto add = [&](MarkovKernel<S> M, bool numeric) {
    auto law = stationary_distribution(M, tol);
    out.candidates.push_back(Candidate<S>{std::move(M), std::move(law), numeric, false, false, std::nullopt, "cand3"});
  };

  if constexpr (is_exact_v<S>) {
    std::vector<std::vector<S>> right;
    std::vector<S> eig;
    bool exact = true;
    for (int a = 0; a < k && exact; ++a) {
      DenseMatrix<S> N(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
      for (int x = 0; x < k; ++x)
        for (int y = 0; y < k; ++y) N(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = nu(a, x, y) / nu(a, x, a);
      auto ep = exact_perron_pair(N);
      if (!ep) {
        exact = false;
        break;
      }
      eig.push_back(nu(a, a, a) * ep->eigenvalue * ep->eigenvalue * ep->eigenvalue);
      right.push_back(ep->right);
    }
    if (exact) {
      for (const auto& e : eig)
        if (e != eig.front()) {
          out.notes.push_back("main eigenvalues of the N_a differ");
          return out;
        }
      auto M = detail::kernel_from_eigen(nu, right, tol);
      if (M && detail::reproduces(*M, nu, tol))
        add(std::move(*M), false);
      else
        out.notes.push_back("kernel from the eigenvectors does not reproduce nu");
      return out;
    }
  }

  // Float eigen step.
  std::vector<double> nud;
  for (const auto& v : nu.nu) nud.push_back(to_double(v));
  TripleMeasure<double> nf{k, nud};
  std::vector<std::vector<double>> right;
  std::vector<double> eig;
  for (int a = 0; a < k; ++a) {
    auto ep = perron_pair(detail::reduced_n(nf, a));
    eig.push_back(nf(a, a, a) * ep.eigenvalue * ep.eigenvalue * ep.eigenvalue);
    right.push_back(ep.right);
  }
  double emax = *std::max_element(eig.begin(), eig.end());
  for (double e : eig)
    if (std::fabs(e - emax) > 1e-9 * emax) {
      out.notes.push_back("main eigenvalues of the N_a differ");
      return out;
    }
  auto Mf = detail::kernel_from_eigen(nf, right, Tolerance{1e-9});
  if (!Mf || !detail::reproduces(*Mf, nf, Tolerance{1e-9})) {
    out.notes.push_back("kernel from the eigenvectors does not reproduce nu");
    return out;
  }
  if constexpr (is_exact_v<S>) {
    std::vector<std::vector<S>> rows;
    bool ok = true;
    for (int a = 0; a < k; ++a) {
      std::vector<S> row;
      S sum(0);
      for (int b = 0; b + 1 < k; ++b) {
        row.push_back(detail::from_double<S>((*Mf)(a, b)));
        sum += row.back();
      }
      row.push_back(S(1) - sum);
      for (const auto& v : row) ok = ok && v > 0;
      rows.push_back(std::move(row));
    }
    if (!ok) {
      out.notes.push_back("rounded kernel is not positive");
      return out;
    }
    MarkovKernel<S> M(k, 1, std::move(rows), tol);
    bool exact_ok = detail::reproduces(M, nu, tol);
    if (!exact_ok) out.notes.push_back("exact re-check of the rounded kernel failed; candidate kept as numeric");
    add(std::move(M), !exact_ok);
  } else {
    add(std::move(*Mf), false);
  }
  return out;
}

template <class S>
struct ProductCandidate {
  std::vector<S> rho;
  bool numeric = false;
  CriterionReport<S> report;
};

template <class S>
struct ProductSearch {
  std::vector<ProductCandidate<S>> candidates;
  /// Z^{rho,S} == 0 for every rho: every product is a candidate.
  bool all_products = false;
  bool exhausted = false;
  std::size_t family_dimension = 0;
  std::vector<std::string> notes;

  std::vector<const ProductCandidate<S>*> invariant() const {
    std::vector<const ProductCandidate<S>*> r;
    for (const auto& c : candidates)
      if (c.report.invariant()) r.push_back(&c);
    return r;
  }
};

namespace detail {

template <class S>
ProductCandidate<S> verify_product(const JumpRateMatrix<S>& T, std::vector<S> rho, bool numeric, const Tolerance& tol) {
  if (!numeric) return ProductCandidate<S>{rho, false, check_product_line(T, rho, tol)};
  std::vector<double> rd;
  for (const auto& v : rho) rd.push_back(to_double(v));
  auto rep = check_product_line(T.template convert<double>(), rd, Tolerance{1e-9});
  CriterionReport<S> r;
  r.verdict = rep.verdict;
  r.criterion = rep.criterion + " (float)";
  r.words_enumerated = rep.words_enumerated;
  r.criteria_evaluated = rep.criteria_evaluated;
  if (rep.witness)
    r.witness = Witness<S>{rep.witness->word, rep.witness->criterion, scalar_cast<S>(rep.witness->residual), std::nullopt};
  r.notes.push_back("irrational density; verified in floating point");
  return ProductCandidate<S>{rho, true, r};
}

// Polynomial in p with coefficients c0 + c1 p + c2 p^2.
template <class S>
using Quadratic = std::array<S, 3>;

template <class S>
bool quadratic_zero(const Quadratic<S>& q, const Tolerance& tol) {
  return is_zero<S>(q[0], tol) && is_zero<S>(q[1], tol) && is_zero<S>(q[2], tol);
}

/// Z^{rho,S}(b,c) for all pairs, in double.
inline std::vector<double> product_balance(const JumpRateMatrix<double>& Sym, const std::vector<double>& rho) {
  const int k = Sym.kappa();
  std::vector<double> r(static_cast<std::size_t>(k * k), 0.0);
  for (int b = 0; b < k; ++b)
    for (int c = 0; c < k; ++c) {
      auto bc = static_cast<WordCode>(b * k + c);
      double acc = -Sym.exit_rate(bc) * rho[static_cast<std::size_t>(b)] * rho[static_cast<std::size_t>(c)];
      for (const auto& [from, rate] : Sym.incoming(bc))
        acc += rate * rho[from / static_cast<WordCode>(k)] * rho[from % static_cast<WordCode>(k)];
      r[bc] = acc;
    }
  return r;
}

inline std::vector<double> softmax(const std::vector<double>& theta) {
  double mx = *std::max_element(theta.begin(), theta.end()), sum = 0;
  std::vector<double> p(theta.size());
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] = std::exp(theta[i] - mx);
  for (auto& v : p) v /= sum;
  return p;
}

/// Levenberg-Marquardt on Z^{rho,S} == 0 with rho = softmax(theta); returns rho when |Z| <= 1e-12.
inline std::optional<std::vector<double>> refine_product(const JumpRateMatrix<double>& Sym, std::vector<double> rho0) {
  const std::size_t k = rho0.size();
  std::vector<double> theta(k);
  for (std::size_t i = 0; i < k; ++i) theta[i] = std::log(std::max(rho0[i], 1e-6));
  auto cost = [&](const std::vector<double>& th) {
    double c = 0;
    for (double v : product_balance(Sym, softmax(th))) c += v * v;
    return c;
  };
  double lambda = 1e-3, c = cost(theta);
  for (int it = 0; it < 200 && c > 1e-26; ++it) {
    auto r = product_balance(Sym, softmax(theta));
    DenseMatrix<double> J(r.size(), k);
    for (std::size_t j = 0; j < k; ++j) {
      auto th = theta;
      th[j] += 1e-7;
      auto r2 = product_balance(Sym, softmax(th));
      for (std::size_t i = 0; i < r.size(); ++i) J(i, j) = (r2[i] - r[i]) / 1e-7;
    }
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      DenseMatrix<double> A(k, k);
      std::vector<double> g(k, 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          double acc = 0;
          for (std::size_t i = 0; i < r.size(); ++i) acc += J(i, a) * J(i, b);
          A(a, b) = acc + (a == b ? lambda * (1 + acc) : 0.0);
        }
        for (std::size_t i = 0; i < r.size(); ++i) g[a] -= J(i, a) * r[i];
      }
      auto sol = solve_linear(A, g, Tolerance{1e-300});
      if (sol.kind == SolutionKind::empty) break;
      auto th = theta;
      for (std::size_t a = 0; a < k; ++a) th[a] += sol.particular[a];
      double c2 = cost(th);
      if (c2 < c) {
        theta = th;
        c = c2;
        lambda = std::max(lambda / 10, 1e-12);
        improved = true;
      } else {
        lambda *= 10;
      }
    }
    if (!improved) break;
  }
  if (c > 1e-24) return std::nullopt;
  return softmax(theta);
}

}  // namespace detail

/// Product measures invariant on the line: symmetrize, linearize Z^{rho,S} == 0, factor-test, verify.
template <class S>
ProductSearch<S> find_product(const JumpRateMatrix<S>& T, const Tolerance& tol = {}) {
  if (T.range() != 2) throw Error("find_product: range L = 2 required");
  const int k = T.kappa();
  auto Sym = symmetrize(T);
  ProductSearch<S> out;
  auto pair = [&](Letter a, Letter b) { return static_cast<WordCode>(a * k + b); };

  std::vector<std::vector<S>> deterministic_samples;
  {
    std::vector<S> u(static_cast<std::size_t>(k), S(1) / S(k));
    deterministic_samples.push_back(u);
    std::vector<S> lin, geo;
    S sl(0), sg(0), g(1);
    for (int a = 0; a < k; ++a) {
      lin.push_back(S(a + 1));
      sl += S(a + 1);
      geo.push_back(g);
      sg += g;
      g *= S(2);
    }
    for (auto& v : lin) v /= sl;
    for (auto& v : geo) v /= sg;
    deterministic_samples.push_back(lin);
    deterministic_samples.push_back(geo);
  }

  if (k == 2) {
    // rho = (1 - p, p): each equation is a quadratic in p.
    using Q = detail::Quadratic<S>;
    auto prod = [](Letter u, Letter v) -> Q {
      if (u == 0 && v == 0) return Q{S(1), S(-2), S(1)};
      if (u == 1 && v == 1) return Q{S(0), S(0), S(1)};
      return Q{S(0), S(1), S(-1)};
    };
    std::vector<Q> eqs;
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        Q q{S(0), S(0), S(0)};
        for (const auto& [from, rate] : Sym.incoming(pair(b, c))) {
          Q t = prod(static_cast<Letter>(from / 2), static_cast<Letter>(from % 2));
          for (int i = 0; i < 3; ++i) q[static_cast<std::size_t>(i)] += rate * t[static_cast<std::size_t>(i)];
        }
        Q t = prod(b, c);
        for (int i = 0; i < 3; ++i) q[static_cast<std::size_t>(i)] -= Sym.exit_rate(pair(b, c)) * t[static_cast<std::size_t>(i)];
        if (!detail::quadratic_zero(q, tol)) eqs.push_back(q);
      }
    out.exhausted = true;
    if (eqs.empty()) {
      out.all_products = true;
      out.family_dimension = 1;
      out.notes.push_back("Z^{rho,S} vanishes for every rho; sampled densities verified");
      for (auto& r : deterministic_samples) out.candidates.push_back(detail::verify_product(T, r, false, tol));
      return out;
    }
    // Roots of the first equation in (0,1), exact when the discriminant is a rational square.
    const Q& q = eqs.front();
    std::vector<std::pair<S, bool>> roots;  // (p, numeric)
    if (is_zero<S>(q[2], tol)) {
      if (!is_zero<S>(q[1], tol)) roots.emplace_back(-q[0] / q[1], false);
    } else {
      S disc = q[1] * q[1] - S(4) * q[2] * q[0];
      if (disc >= 0 || is_zero<S>(disc, tol)) {
        std::optional<S> sq;
        if constexpr (is_exact_v<S>)
          sq = exact_sqrt(disc);
        else
          sq = std::sqrt(std::max(disc, 0.0));
        if (sq) {
          roots.emplace_back((-q[1] + *sq) / (S(2) * q[2]), false);
          roots.emplace_back((-q[1] - *sq) / (S(2) * q[2]), false);
        } else {
          double sd = std::sqrt(to_double(disc)), q1 = to_double(q[1]), q2 = to_double(q[2]);
          roots.emplace_back(detail::from_double<S>((-q1 + sd) / (2 * q2)), true);
          roots.emplace_back(detail::from_double<S>((-q1 - sd) / (2 * q2)), true);
        }
      }
    }
    std::vector<S> seen;
    for (const auto& [p, numeric] : roots) {
      if (!(p > 0) || !(p < 1)) continue;
      if (std::any_of(seen.begin(), seen.end(), [&](const S& s) { return approx_equal<S>(s, p, tol); })) continue;
      seen.push_back(p);
      bool all_ok = true;
      for (const auto& e : eqs) {
        if (numeric) {
          double pd = to_double(p);
          double v = to_double(e[0]) + to_double(e[1]) * pd + to_double(e[2]) * pd * pd;
          all_ok = all_ok && std::fabs(v) <= 1e-9 * (1 + to_double(Sym.max_rate()));
        } else {
          all_ok = all_ok && is_zero<S>(e[0] + e[1] * p + e[2] * p * p, tol);
        }
      }
      if (!all_ok) continue;
      out.candidates.push_back(detail::verify_product(T, std::vector<S>{S(1) - p, p}, numeric, tol));
    }
    return out;
  }

  // kappa >= 3: linear system in the symmetric unknowns rho_{uv}, u <= v.
  std::vector<std::vector<int>> idx(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k)));
  int nu = 0;
  for (int u = 0; u < k; ++u)
    for (int v = u; v < k; ++v) idx[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = idx[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = nu++;
  auto id = [&](Letter u, Letter v) { return static_cast<std::size_t>(idx[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]); };
  std::vector<std::vector<S>> rows;
  bool vacuous = true;
  for (int b = 0; b < k; ++b)
    for (int c = 0; c < k; ++c) {
      std::vector<S> row(static_cast<std::size_t>(nu), S(0));
      for (const auto& [from, rate] : Sym.incoming(pair(b, c)))
        row[id(static_cast<Letter>(from / static_cast<WordCode>(k)), static_cast<Letter>(from % static_cast<WordCode>(k)))] += rate;
      row[id(b, c)] -= Sym.exit_rate(pair(b, c));
      if (std::any_of(row.begin(), row.end(), [&](const S& v) { return !is_zero<S>(v, tol); })) vacuous = false;
      rows.push_back(std::move(row));
    }
  if (vacuous) {
    out.all_products = true;
    out.exhausted = true;
    out.family_dimension = static_cast<std::size_t>(k - 1);
    out.notes.push_back("Z^{rho,S} vanishes for every rho; sampled densities verified");
    for (auto& r : deterministic_samples) out.candidates.push_back(detail::verify_product(T, r, false, tol));
    return out;
  }
  std::vector<S> norm(static_cast<std::size_t>(nu), S(0));
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v) norm[id(u, v)] += S(1);
  rows.push_back(norm);
  DenseMatrix<S> A(rows.size(), static_cast<std::size_t>(nu));
  std::vector<S> rhs(rows.size(), S(0));
  rhs.back() = S(1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(nu); ++j) A(i, j) = rows[i][j];
  auto sol = solve_linear(A, rhs, tol);
  if (sol.kind == SolutionKind::empty) {
    out.exhausted = true;
    out.notes.push_back("linearized system has no solution");
    return out;
  }
  out.family_dimension = sol.dimension();
  std::vector<std::vector<S>> points;
  std::vector<std::size_t> all_rows(static_cast<std::size_t>(nu));
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  if (sol.dimension() == 0) {
    out.exhausted = true;
    points.push_back(sol.particular);
  } else if (sol.dimension() <= 3) {
    points = detail::polytope_vertices(sol, all_rows, tol);
    if (!points.empty()) points.push_back(detail::centroid(points));
    out.notes.push_back("affine family of dimension " + std::to_string(sol.dimension()) + "; vertices and centroid factor-tested");
  } else {
    points.push_back(sol.particular);
    out.notes.push_back("affine family of dimension " + std::to_string(sol.dimension()) + "; basis point factor-tested only");
  }
  for (const auto& y : points) {
    std::vector<S> rho;
    bool numeric = false, ok = true;
    for (int u = 0; u < k && ok; ++u) {
      const S& d = y[id(u, u)];
      if (!(d > 0)) {
        ok = false;
        break;
      }
      std::optional<S> r;
      if constexpr (is_exact_v<S>)
        r = exact_sqrt(d);
      else
        r = std::sqrt(d);
      if (!r) {
        numeric = true;
        r = detail::from_double<S>(std::sqrt(to_double(d)));
      }
      rho.push_back(*r);
    }
    if (!ok) continue;
    for (int u = 0; u < k && ok; ++u)
      for (int v = u + 1; v < k && ok; ++v) {
        if (numeric)
          ok = std::fabs(to_double(y[id(u, v)]) - to_double(rho[static_cast<std::size_t>(u)]) * to_double(rho[static_cast<std::size_t>(v)])) <= 1e-9;
        else
          ok = approx_equal<S>(y[id(u, v)], rho[static_cast<std::size_t>(u)] * rho[static_cast<std::size_t>(v)], tol);
      }
    if (!ok) continue;
    out.candidates.push_back(detail::verify_product(T, rho, numeric, tol));
  }
  if (out.invariant().empty() && sol.dimension() > 0) {
    // Rank-one points of the family are rarely vertices; search for them directly, then verify exactly.
    auto symd = Sym.template convert<double>();
    std::vector<std::vector<double>> starts;
    for (const auto& y : points) {
      std::vector<double> r;
      for (int u = 0; u < k; ++u) r.push_back(std::sqrt(std::max(to_double(y[id(u, u)]), 1e-6)));
      starts.push_back(r);
    }
    for (const auto& r : deterministic_samples) {
      std::vector<double> rd;
      for (const auto& v : r) rd.push_back(to_double(v));
      starts.push_back(rd);
    }
    std::vector<std::vector<double>> found;
    for (const auto& st : starts) {
      auto r = detail::refine_product(symd, st);
      if (!r || *std::min_element(r->begin(), r->end()) < 1e-9) continue;
      bool dup = std::any_of(found.begin(), found.end(), [&](const std::vector<double>& f) {
        for (std::size_t i = 0; i < f.size(); ++i)
          if (std::fabs(f[i] - (*r)[i]) > 1e-7) return false;
        return true;
      });
      if (dup) continue;
      found.push_back(*r);
      std::vector<S> rho;
      S sum(0);
      for (double v : *r) {
        rho.push_back(detail::from_double<S>(v));
        sum += rho.back();
      }
      for (auto& v : rho) v /= sum;
      auto cand = detail::verify_product(T, rho, false, tol);
      if (!cand.report.invariant()) {
        std::vector<S> raw;
        for (double v : *r) raw.push_back(scalar_cast<S>(v));
        cand = detail::verify_product(T, raw, true, tol);
      }
      out.candidates.push_back(cand);
    }
    if (!found.empty()) out.notes.push_back("rank-one points located by Levenberg-Marquardt inside the family");
  }
  return out;
}

namespace detail {

template <class S>
void finish_candidate(const JumpRateMatrix<S>& T, Candidate<S>& c, const Tolerance& tol) {
  if (c.numeric) {
    auto ctx = CriterionContext<double>(T.template convert<double>(), c.law.template convert<double>(Tolerance{1e-9}),
                                        Tolerance{1e-9});
    auto z = z_table(ctx);
    c.ncycle3 = check_markov_cycle(z, 3).invariant();
    auto rep = check_markov_line(z);
    c.line_invariant = rep.invariant();
    if (rep.witness) c.witness = rep.witness->word;
    return;
  }
  auto z = z_table(CriterionContext<S>(T, c.law, tol));
  c.ncycle3 = check_markov_cycle(z, 3).invariant();
  auto rep = check_markov_line(z);
  c.line_invariant = rep.invariant();
  if (rep.witness) c.witness = rep.witness->word;
}

template <class S>
bool same_kernel(const MarkovKernel<S>& a, const MarkovKernel<S>& b, const Tolerance& tol) {
  for (WordCode c = 0; c < a.num_contexts(); ++c)
    for (int y = 0; y < a.kappa(); ++y)
      if (!approx_equal<S>(a(c, y), b(c, y), tol)) return false;
  return true;
}

}  // namespace detail

/// S_3(T) by the cand3 algorithm over samples of the Cycle_3 family, then the line criterion on each kernel.
template <class S>
CandidateSet<S> find_markov(const JumpRateMatrix<S>& T, const Tolerance& tol = {}) {
  if (T.range() != 2) throw Error("find_markov: range L = 2 required");
  const int k = T.kappa();
  auto fam = solve_cycle3_system(T, tol);
  CandidateSet<S> out;
  if (fam.solutions.kind == SolutionKind::empty) {
    out.exhausted = true;
    out.notes.push_back("Cycle_3 system has no probability solution");
    return out;
  }
  out.family_dimension = fam.solutions.dimension();
  out.family_all = fam.all;
  TripleMeasure<S> ix{k, {}};
  std::vector<std::size_t> reps;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) {
        std::array<int, 3> w{a, b, c}, r1{b, c, a}, r2{c, a, b};
        if (w <= r1 && w <= r2) reps.push_back(ix.index(a, b, c));
      }
  std::vector<std::vector<S>> samples;
  if (fam.all) {
    // Vertices are the uniform laws on rotation orbits; use their centroid.
    std::vector<S> c(static_cast<std::size_t>(k * k * k), S(0));
    S norb(static_cast<int>(reps.size()));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int d = 0; d < k; ++d) {
          std::size_t size = (a == b && b == d) ? 1 : 3;
          c[ix.index(a, b, d)] = S(1) / (norb * S(static_cast<int>(size)));
        }
    samples.push_back(std::move(c));
    out.notes.push_back("every rotation-invariant nu solves Cycle_3; every positive kernel is in S_3(T)");
  } else if (fam.solutions.dimension() == 0) {
    out.exhausted = true;
    samples.push_back(fam.solutions.particular);
  } else if (fam.solutions.dimension() <= 3) {
    auto verts = detail::polytope_vertices(fam.solutions, reps, tol);
    if (!verts.empty()) {
      auto c = detail::centroid(verts);
      samples.push_back(c);
      for (const auto& v : verts) {
        std::vector<S> mid(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) mid[i] = (c[i] + v[i]) / S(2);
        samples.push_back(std::move(mid));
      }
      for (auto& v : verts) samples.push_back(std::move(v));
    }
  } else {
    samples.push_back(fam.solutions.particular);
    out.notes.push_back("family of dimension " + std::to_string(fam.solutions.dimension()) +
                        " reported by its basis; only the basis point is sampled");
  }
  for (const auto& s : samples) {
    ++out.nu_samples;
    auto cs = candidate_kernels(T, TripleMeasure<S>{k, s}, tol);
    for (auto& c : cs.candidates) {
      bool dup = false;
      for (const auto& e : out.candidates) dup = dup || detail::same_kernel(e.kernel, c.kernel, tol);
      if (!dup) out.candidates.push_back(std::move(c));
    }
  }
  if (fam.all) {
    // Constant-row kernels of the product solutions.
    auto ps = find_product(T, tol);
    for (const auto& pc : ps.candidates) {
      if (pc.numeric) continue;
      MarkovKernel<S> M(k, 1, std::vector<std::vector<S>>(static_cast<std::size_t>(k), pc.rho), tol);
      bool dup = false;
      for (const auto& e : out.candidates) dup = dup || detail::same_kernel(e.kernel, M, tol);
      if (dup) continue;
      auto law = stationary_distribution(M, tol);
      out.candidates.push_back(Candidate<S>{std::move(M), std::move(law), false, false, false, std::nullopt, "product"});
    }
  }
  for (auto& c : out.candidates) detail::finish_candidate(T, c, tol);
  return out;
}

/// F_{(a,u,v,d),(b,c)} = M_au M_uv M_vd / (M_ab M_bc M_cd), indexed by encode({a,u,v,d,b,c}).
template <class S>
struct RatioTable {
  int kappa = 2;
  std::vector<S> F;

  std::size_t index(Letter a, Letter u, Letter v, Letter d, Letter b, Letter c) const {
    return static_cast<std::size_t>(encode({a, u, v, d, b, c}, kappa));
  }
  const S& operator()(Letter a, Letter u, Letter v, Letter d, Letter b, Letter c) const { return F[index(a, u, v, d, b, c)]; }
};

template <class S>
RatioTable<S> ratio_table(const MarkovKernel<S>& M) {
  if (M.memory() != 1) throw Error("ratio_table: memory-1 kernel required");
  int k = M.kappa();
  RatioTable<S> t{k, std::vector<S>(ipow(k, 6), S(0))};
  for (WordCode code = 0; code < t.F.size(); ++code) {
    Word w = decode(code, k, 6);
    t.F[code] = M(w[0], w[1]) * M(w[1], w[2]) * M(w[2], w[3]) / (M(w[0], w[4]) * M(w[4], w[5]) * M(w[5], w[3]));
  }
  return t;
}

/// The unique positive stochastic M with the given ratio table. F fixes M up to
/// M -> alpha D M D^{-1}; stochasticity removes that freedom through the Perron vector.
template <class S>
MarkovKernel<S> kernel_from_ratios(const RatioTable<S>& F, const Tolerance& tol = {}) {
  const int k = F.kappa;
  const std::size_t K = static_cast<std::size_t>(k);
  if (F.F.size() != ipow(k, 6)) throw Error("ratio table has wrong size");
  for (const auto& v : F.F)
    if (!(v > 0)) throw Error("ratio table entries must be positive");
  // Gauge A_{0y} = 1, A_{00} = 1.
  DenseMatrix<S> A(K, K);
  for (int y = 0; y < k; ++y) A(static_cast<std::size_t>(y), 0) = F(0, y, 0, 0, 0, 0);
  for (int x = 0; x < k; ++x)
    for (int y = 0; y < k; ++y) A(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = F(0, x, y, 0, 0, 0) / F(0, y, 0, 0, 0, 0);
  std::vector<std::vector<S>> rows(K, std::vector<S>(K));
  auto build = [&](const S& lambda, const std::vector<S>& r) {
    for (std::size_t x = 0; x < K; ++x)
      for (std::size_t y = 0; y < K; ++y) rows[x][y] = A(x, y) * r[y] / (lambda * r[x]);
  };
  if constexpr (is_exact_v<S>) {
    auto ep = exact_perron_pair(A);
    if (!ep) throw Error("kernel_from_ratios: Perron data of the gauge matrix is not rational; use float mode");
    build(ep->eigenvalue, ep->right);
  } else {
    auto ep = perron_pair(A);
    build(ep.eigenvalue, ep.right);
  }
  MarkovKernel<S> M(k, 1, rows, tol);
  auto back = ratio_table(M);
  for (std::size_t i = 0; i < back.F.size(); ++i)
    if (!approx_equal<S>(back.F[i], F.F[i], tol, 1.0 + to_double(abs_value(F.F[i]))))
      throw Error("kernel_from_ratios: inconsistent ratio table at " + word_to_string(decode(i, k, 6)));
  return M;
}

}  // namespace ipsinv
