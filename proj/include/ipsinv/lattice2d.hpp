#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ipsinv/core.hpp"
#include "ipsinv/criteria.hpp"

namespace ipsinv {

using Cell = std::pair<int, int>;  // (row, column)

/// Finite set of cells in lexicographic order.
struct Shape {
  std::vector<Cell> cells;

  Shape() = default;
  explicit Shape(std::vector<Cell> c) : cells(std::move(c)) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  }
  std::size_t size() const { return cells.size(); }
  bool contains(const Cell& c) const { return std::binary_search(cells.begin(), cells.end(), c); }
  Shape with(const Cell& c) const {
    auto v = cells;
    v.push_back(c);
    return Shape(std::move(v));
  }

  static Shape gamma0() { return Shape({{0, 0}, {0, 1}, {1, 0}}); }
  static Shape gamma1() { return gamma0().with({2, 0}); }
  static Shape gamma2() { return gamma1().with({1, 1}); }
  static Shape hypercube(int side) {
    std::vector<Cell> c;
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) c.emplace_back(i, j);
    return Shape(std::move(c));
  }
  static Shape square() { return hypercube(2); }
};

/// Jump rates on 2x2 squares; patterns list the cells (0,0),(0,1),(1,0),(1,1).
template <class S>
struct SquareJRM {
  JumpRateMatrix<S> T;

  explicit SquareJRM(int kappa) : T(kappa, 4) {}
  explicit SquareJRM(JumpRateMatrix<S> t) : T(std::move(t)) {
    if (T.range() != 4) throw Error("square rates need patterns of 4 cells");
  }
  int kappa() const { return T.kappa(); }
  void set(const Word& from, const Word& to, const S& rate) { T.set(from, to, rate); }
  void add(const Word& from, const Word& to, const S& rate) { T.add(from, to, rate); }
};

/// Bold-Z values and their partial sums for a fixed product measure.
template <class S>
class Lattice2DContext {
 public:
  Lattice2DContext(SquareJRM<S> t2, std::vector<S> rho, Tolerance tol = {})
      : T2_(std::move(t2)), rho_(std::move(rho)), tol_(tol) {
    const int k = T2_.kappa();
    if (static_cast<int>(rho_.size()) != k) throw Error("rho has wrong size");
    for (const auto& v : rho_)
      if (!(v > 0)) throw Error("rho must have full support");
    scale_ = 1.0 + to_double(T2_.T.max_rate());
    WordCode n = ipow(k, 4);
    z_.assign(n, S(0));
    for (WordCode x = 0; x < n; ++x) {
      Word xw = decode(x, k, 4);
      S px = weight(xw);
      S acc = -T2_.T.exit_rate(x);
      for (const auto& [y, rate] : T2_.T.incoming(x)) acc += weight(decode(y, k, 4)) / px * rate;
      z_[x] = acc;
    }
    // partial_[mask][code of the fixed letters]: free cells summed against rho.
    partial_.resize(16);
    for (unsigned mask = 0; mask < 16; ++mask) {
      int nfixed = __builtin_popcount(mask);
      partial_[mask].assign(ipow(k, nfixed), S(0));
      for (WordCode x = 0; x < n; ++x) {
        Word xw = decode(x, k, 4);
        S w(1);
        WordCode code = 0;
        for (int c = 0; c < 4; ++c) {
          if (mask & (1u << c))
            code = code * static_cast<WordCode>(k) + static_cast<WordCode>(xw[static_cast<std::size_t>(c)]);
          else
            w *= rho_[static_cast<std::size_t>(xw[static_cast<std::size_t>(c)])];
        }
        partial_[mask][code] += w * z_[x];
      }
    }
  }

  const SquareJRM<S>& rates() const { return T2_; }
  const std::vector<S>& rho() const { return rho_; }
  const Tolerance& tolerance() const { return tol_; }
  bool zero(const S& v) const { return is_zero<S>(v, tol_, scale_); }

  const S& boldz(const Word& x) const { return z_.at(encode(x, T2_.kappa())); }
  const std::vector<S>& boldz_table() const { return z_; }

  /// Fixed cells carry a letter, free cells carry -1.
  const S& boldz_partial(const Word& partial) const {
    if (partial.size() != 4) throw Error("boldz_partial: pattern over the square expected");
    unsigned mask = 0;
    WordCode code = 0;
    for (int c = 0; c < 4; ++c) {
      Letter a = partial[static_cast<std::size_t>(c)];
      if (a < 0) continue;
      mask |= 1u << c;
      code = code * static_cast<WordCode>(T2_.kappa()) + static_cast<WordCode>(a);
    }
    if (mask == 0) throw Error("boldz_partial: the square must meet the shape");
    return partial_[mask][code];
  }

  /// Sum over the squares meeting C of the partial bold-Z values.
  S nline(const Shape& C, const Word& x) const {
    if (x.size() != C.size()) throw Error("nline_2d: pattern size differs from the shape");
    if (C.cells.empty()) return S(0);
    std::map<Cell, Letter> at;
    int r0 = C.cells.front().first, r1 = r0, c0 = C.cells.front().second, c1 = c0;
    for (std::size_t i = 0; i < C.size(); ++i) {
      at[C.cells[i]] = x[i];
      r0 = std::min(r0, C.cells[i].first);
      r1 = std::max(r1, C.cells[i].first);
      c0 = std::min(c0, C.cells[i].second);
      c1 = std::max(c1, C.cells[i].second);
    }
    S total(0);
    Word part(4);
    for (int r = r0 - 1; r <= r1; ++r)
      for (int c = c0 - 1; c <= c1; ++c) {
        bool meets = false;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj) {
            auto it = at.find({r + di, c + dj});
            Letter v = it == at.end() ? -1 : it->second;
            part[static_cast<std::size_t>(di * 2 + dj)] = v;
            meets = meets || v >= 0;
          }
        if (meets) total += boldz_partial(part);
      }
    return total;
  }

 private:
  S weight(const Word& w) const {
    S p(1);
    for (Letter a : w) p *= rho_[static_cast<std::size_t>(a)];
    return p;
  }

  SquareJRM<S> T2_;
  std::vector<S> rho_;
  Tolerance tol_;
  double scale_ = 1.0;
  std::vector<S> z_;
  std::vector<std::vector<S>> partial_;
};

template <class S>
S boldz(const SquareJRM<S>& T2, const std::vector<S>& rho, const Word& x) {
  return Lattice2DContext<S>(T2, rho).boldz(x);
}

template <class S>
S boldz_partial(const SquareJRM<S>& T2, const std::vector<S>& rho, const Word& partial) {
  return Lattice2DContext<S>(T2, rho).boldz_partial(partial);
}

template <class S>
S nline_2d(const SquareJRM<S>& T2, const std::vector<S>& rho, const Shape& C, const Word& x) {
  return Lattice2DContext<S>(T2, rho).nline(C, x);
}

namespace detail {

// Drops the cell at position `skip` of the pattern.
inline Word drop(const Word& x, std::size_t skip) {
  Word y;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (i != skip) y.push_back(x[i]);
  return y;
}

template <class S>
bool check_difference(const Lattice2DContext<S>& ctx, const Shape& small, const Shape& big, CriterionReport<S>& rep,
                      const std::string& name) {
  const int k = ctx.rates().kappa();
  std::size_t skip = 0;
  while (skip < small.size() && small.cells[skip] == big.cells[skip]) ++skip;
  WordCode total = ipow(k, static_cast<int>(big.size()));
  for (WordCode c = 0; c < total; ++c) {
    Word x = decode(c, k, static_cast<int>(big.size()));
    S r = ctx.nline(big, x) - ctx.nline(small, drop(x, skip));
    ++rep.words_enumerated;
    if (!ctx.zero(r)) {
      rep.verdict = Verdict::not_invariant;
      rep.criterion = name;
      rep.witness = Witness<S>{x, name, r, std::nullopt};
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Two-shape criterion: NLine == 0 on Gamma_0 and NLine(Gamma_2) - NLine(Gamma_1) == 0.
template <class S>
CriterionReport<S> check_product_2d(const Lattice2DContext<S>& ctx) {
  const int k = ctx.rates().kappa();
  CriterionReport<S> rep;
  rep.criterion = "nline_2d(gamma0), nline_2d(gamma2) - nline_2d(gamma1)";
  rep.criteria_evaluated = {"nline_2d(gamma0)", "nline_2d(gamma2) - nline_2d(gamma1)"};
  Shape g0 = Shape::gamma0();
  for (WordCode c = 0; c < ipow(k, 3); ++c) {
    Word x = decode(c, k, 3);
    S r = ctx.nline(g0, x);
    ++rep.words_enumerated;
    if (!ctx.zero(r)) {
      rep.verdict = Verdict::not_invariant;
      rep.criterion = "nline_2d(gamma0)";
      rep.witness = Witness<S>{x, rep.criterion, r, std::nullopt};
      return rep;
    }
  }
  detail::check_difference(ctx, Shape::gamma1(), Shape::gamma2(), rep, "nline_2d(gamma2) - nline_2d(gamma1)");
  return rep;
}

template <class S>
CriterionReport<S> check_product_2d(const SquareJRM<S>& T2, const std::vector<S>& rho, const Tolerance& tol = {}) {
  return check_product_2d(Lattice2DContext<S>(T2, rho, tol));
}

/// General form: NLine on the single vertex, and NLine(C + c) - NLine(C) for every C, c inside [0,2]^2.
template <class S>
CriterionReport<S> check_product_qdq(const Lattice2DContext<S>& ctx) {
  const int k = ctx.rates().kappa();
  CriterionReport<S> rep;
  rep.criterion = "nline_2d({0}), nline_2d(C+c) - nline_2d(C), C in [0,2]^2";
  Shape origin({{0, 0}});
  for (int a = 0; a < k; ++a) {
    S r = ctx.nline(origin, {a});
    ++rep.words_enumerated;
    if (!ctx.zero(r)) {
      rep.verdict = Verdict::not_invariant;
      rep.criterion = "nline_2d({0})";
      rep.witness = Witness<S>{{a}, rep.criterion, r, std::nullopt};
      return rep;
    }
  }
  auto big = Shape::hypercube(3).cells;
  for (unsigned mask = 0; mask < (1u << big.size()); ++mask) {
    std::vector<Cell> cs;
    for (std::size_t i = 0; i < big.size(); ++i)
      if (mask & (1u << i)) cs.push_back(big[i]);
    Shape C(cs);
    for (std::size_t i = 0; i < big.size(); ++i) {
      if (mask & (1u << i)) continue;
      if (!detail::check_difference(ctx, C, C.with(big[i]), rep, "nline_2d(C+c) - nline_2d(C)")) return rep;
    }
  }
  return rep;
}

/// Bold-Z identically zero; sufficient for invariance, not necessary.
template <class S>
bool check_boldz_sufficient(const SquareJRM<S>& T2, const std::vector<S>& rho, const Tolerance& tol = {}) {
  Lattice2DContext<S> ctx(T2, rho, tol);
  for (const auto& v : ctx.boldz_table())
    if (!ctx.zero(v)) return false;
  return true;
}

template <class S>
bool mass_preserving(const JumpRateMatrix<S>& T) {
  for (const auto& [key, v] : T.entries()) {
    int a = 0, b = 0;
    for (Letter x : decode(key.first, T.kappa(), T.range())) a += x;
    for (Letter x : decode(key.second, T.kappa(), T.range())) b += x;
    if (a != b) return false;
  }
  return true;
}

/// Poisson(lambda) truncated to {0, ..., kappa-1}.
template <class S>
std::vector<S> truncated_poisson(const S& lambda, int kappa) {
  std::vector<S> r;
  S term(1), sum(0);
  for (int j = 0; j < kappa; ++j) {
    if (j > 0) term = term * lambda / S(j);
    r.push_back(term);
    sum += term;
  }
  for (auto& v : r) v /= sum;
  return r;
}

template <class S>
struct MultinomialCheck {
  S lambda;
  /// Bold-Z vanishes on squares whose total mass stays below the truncation.
  bool interior_zero = false;
  S interior_residual;
  /// Largest |bold-Z| on squares where the truncation removed rates.
  S truncation_residual;
  CriterionReport<S> report;
};

/// Truncated-Poisson products for a mass-preserving square JRM. Interior squares (total mass
/// <= kappa - 1) see the untruncated dynamics; the remaining residual is the truncation effect.
template <class S>
std::vector<MultinomialCheck<S>> check_mass_preserving_multinomial(const SquareJRM<S>& T2, const std::vector<S>& lambdas,
                                                                   const Tolerance& tol = {}) {
  if (!mass_preserving(T2.T)) throw Error("check_mass_preserving_multinomial: rates do not preserve mass");
  const int k = T2.kappa();
  std::vector<MultinomialCheck<S>> out;
  for (const auto& lambda : lambdas) {
    if (!(lambda > 0)) throw Error("lambda must be positive");
    Lattice2DContext<S> ctx(T2, truncated_poisson(lambda, k), tol);
    MultinomialCheck<S> c{lambda, true, S(0), S(0), check_product_2d(ctx)};
    for (WordCode x = 0; x < ctx.boldz_table().size(); ++x) {
      int mass = 0;
      for (Letter a : decode(x, k, 4)) mass += a;
      S v = abs_value(ctx.boldz_table()[x]);
      if (mass <= k - 1) {
        c.interior_residual = std::max(c.interior_residual, v);
        if (!ctx.zero(v)) c.interior_zero = false;
      } else {
        c.truncation_residual = std::max(c.truncation_residual, v);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace ipsinv
