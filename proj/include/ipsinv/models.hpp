#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipsinv/core.hpp"
#include "ipsinv/criteria.hpp"
#include "ipsinv/lattice2d.hpp"

namespace ipsinv {

/// A catalog system with the verdicts the acceptance suite expects from it.
struct ModelSpec {
  std::string name;
  std::map<std::string, std::string> params;
  std::optional<JumpRateMatrix<Rational>> T;
  std::optional<SquareJRM<Rational>> square;
  std::optional<MarkovKernel<Rational>> kernel;
  std::optional<std::vector<Rational>> rho;
  /// pi(letter) for models that come with a projection.
  std::optional<std::vector<Letter>> projection;
  std::vector<std::string> expected;
};

/// rho with rho_u rho_v = g(u+v) on the support; g is indexed by the sum 0 .. 2(kappa-1).
/// Built as rho_u proportional to g(u0 + u) for the smallest support letter u0.
inline std::vector<Rational> almost_geometric(int kappa, std::vector<Letter> support, const std::vector<Rational>& g) {
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (support.empty()) throw Error("almost_geometric: empty support");
  if (static_cast<int>(g.size()) < 2 * kappa - 1) throw Error("almost_geometric: g must cover sums 0..2(kappa-1)");
  for (Letter u : support)
    if (u < 0 || u >= kappa) throw Error("almost_geometric: support letter outside the alphabet");
  const Letter u0 = support.front();
  const Rational& g0 = g[static_cast<std::size_t>(2 * u0)];
  if (!(g0 > 0)) throw Error("almost_geometric: g must be positive on the support");
  std::vector<Rational> rho(static_cast<std::size_t>(kappa), Rational(0));
  Rational sum = 0;
  for (Letter u : support) {
    const Rational& v = g[static_cast<std::size_t>(u0 + u)];
    if (!(v > 0)) throw Error("almost_geometric: g must be positive on the support");
    rho[static_cast<std::size_t>(u)] = v;
    sum += v;
  }
  for (Letter u : support)
    for (Letter v : support)
      if (rho[static_cast<std::size_t>(u)] * rho[static_cast<std::size_t>(v)] != g0 * g[static_cast<std::size_t>(u + v)])
        throw Error("almost_geometric: g is inconsistent at (" + std::to_string(u) + "," + std::to_string(v) + ")");
  for (auto& v : rho) v /= sum;
  return rho;
}

inline std::vector<Rational> geometric(const Rational& q, int kappa) {
  if (!(q > 0)) throw Error("geometric: q must be positive");
  std::vector<Rational> g;
  Rational p = 1;
  for (int s = 0; s <= 2 * (kappa - 1); ++s) {
    g.push_back(p);
    p *= q;
  }
  std::vector<Letter> all;
  for (int a = 0; a < kappa; ++a) all.push_back(a);
  return almost_geometric(kappa, all, g);
}

namespace models {

inline void require_nonnegative(const Rational& v, const char* what) {
  if (v < 0) throw Error(std::string(what) + " must be nonnegative");
}

inline ModelSpec tasep() {
  ModelSpec m{"tasep", {}, JumpRateMatrix<Rational>(2, 2), {}, {}, {}, {}, {}};
  m.T->set({1, 0}, {0, 1}, 1);
  m.rho = std::vector<Rational>{Rational(1, 2), Rational(1, 2)};
  m.expected = {"every Bernoulli product is invariant on the line", "no non-product Markov law"};
  return m;
}

/// Contact process. Range 2: infection from either neighbour pair, recovery carried by the left site.
inline ModelSpec contact(const Rational& lambda, int range = 2) {
  if (!(lambda > 0)) throw Error("contact: lambda must be positive");
  ModelSpec m{"contact", {{"lambda", to_string(lambda)}, {"range", std::to_string(range)}}, {}, {}, {}, {}, {}, {}};
  if (range == 2) {
    JumpRateMatrix<Rational> T(2, 2);
    T.set({1, 0}, {1, 1}, lambda);
    T.set({0, 1}, {1, 1}, lambda);
    T.set({1, 1}, {0, 1}, 1);
    T.set({1, 0}, {0, 0}, 1);
    m.T = std::move(T);
  } else if (range == 3) {
    JumpRateMatrix<Rational> T(2, 3);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        T.set({a, 1, b}, {a, 0, b}, 1);
        if (a + b > 0) T.set({a, 0, b}, {a, 1, b}, lambda * (a + b));
      }
    m.T = std::move(T);
  } else {
    throw Error("contact: range must be 2 or 3");
  }
  m.expected = {"0^n is absorbing on every cycle", "no full-support Markov law of any memory"};
  return m;
}

inline ModelSpec voter() {
  ModelSpec m{"voter", {}, JumpRateMatrix<Rational>(2, 3), {}, {}, {}, {}, {}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        int r = (c == b) + (c == a);
        if (r) m.T->set({a, 1 - c, b}, {a, c, b}, r);
      }
  m.expected = {"absorbing states 0^n and 1^n on every cycle", "no full-support Markov law of any memory"};
  return m;
}

/// Spin flip at rate x^{(2b-1)(2a+2c-2)} with x = e^{-beta}.
inline ModelSpec stochastic_ising(const Rational& x) {
  if (!(x > 0)) throw Error("stochastic_ising: x must be positive");
  ModelSpec m{"stochastic_ising", {{"x", to_string(x)}}, JumpRateMatrix<Rational>(2, 3), {}, {}, {}, {}, {}};
  auto power = [&](int e) {
    Rational r = 1;
    for (int i = 0; i < std::abs(e); ++i) r *= x;
    return e < 0 ? Rational(1 / r) : r;
  };
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) m.T->set({a, b, c}, {a, 1 - b, c}, power((2 * b - 1) * (2 * a + 2 * c - 2)));
  Rational x2 = x * x;
  Rational stay = 1 / (1 + x2), flip = x2 / (1 + x2);
  m.kernel = MarkovKernel<Rational>(2, 1, {{stay, flip}, {flip, stay}});
  m.rho = std::vector<Rational>{Rational(1, 2), Rational(1, 2)};
  m.expected = {"Z == 0 for the kernel", "line-invariant Markov law"};
  return m;
}

enum class Tasep3Variant { overtake, cyclic };

/// Three colours. overtake: larger colours pass smaller ones; cyclic: i passes i - 1 mod 3.
inline ModelSpec tasep3(const Rational& r1, const Rational& r2, const Rational& r3, Tasep3Variant v = Tasep3Variant::overtake) {
  for (const auto* r : {&r1, &r2, &r3}) require_nonnegative(*r, "tasep3 rate");
  ModelSpec m{"tasep3", {{"variant", v == Tasep3Variant::overtake ? "overtake" : "cyclic"}}, JumpRateMatrix<Rational>(3, 2), {}, {}, {}, {}, {}};
  m.rho = std::vector<Rational>(3, Rational(1, 3));
  if (v == Tasep3Variant::overtake) {
    m.params["r10"] = to_string(r1);
    m.params["r20"] = to_string(r2);
    m.params["r21"] = to_string(r3);
    m.T->set({1, 0}, {0, 1}, r1);
    m.T->set({2, 0}, {0, 2}, r2);
    m.T->set({2, 1}, {1, 2}, r3);
    if (r2 == r1 + r3)
      m.expected = {"every full-support product is invariant"};
    else
      m.expected = {"no full-support invariant product"};
  } else {
    m.params["r02"] = to_string(r1);
    m.params["r10"] = to_string(r2);
    m.params["r21"] = to_string(r3);
    m.T->set({0, 2}, {2, 0}, r1);
    m.T->set({1, 0}, {0, 1}, r2);
    m.T->set({2, 1}, {1, 2}, r3);
    m.expected = {"no positive Markov law unless all rates vanish"};
  }
  return m;
}

/// Exchange model on three colours with rates t[(a,b) -> (b,a)].
inline ModelSpec exchange3(const std::map<std::pair<Letter, Letter>, Rational>& rates) {
  ModelSpec m{"exchange3", {}, JumpRateMatrix<Rational>(3, 2), {}, {}, {}, {}, {}};
  for (const auto& [ab, r] : rates) {
    require_nonnegative(r, "exchange rate");
    if (ab.first == ab.second) throw Error("exchange3: letters must differ");
    m.T->set({ab.first, ab.second}, {ab.second, ab.first}, r);
    m.params["t" + std::to_string(ab.first) + std::to_string(ab.second)] = to_string(r);
  }
  return m;
}

/// Zero-range mass migration on {0, ..., kappa-1}: part k of the mass a moves right at rate g(a,k).
/// Moves that leave the truncation are dropped.
inline ModelSpec zero_range(const std::function<Rational(int, int)>& g, int kappa) {
  if (kappa < 2) throw Error("zero_range: kappa >= 2 required");
  ModelSpec m{"zero_range", {{"kappa", std::to_string(kappa)}}, JumpRateMatrix<Rational>(kappa, 2), {}, {}, {}, {}, {}};
  for (int a = 1; a < kappa; ++a)
    for (int b = 0; b < kappa; ++b)
      for (int k = 1; k <= a; ++k) {
        if (b + k > kappa - 1) continue;
        Rational r = g(a, k);
        require_nonnegative(r, "zero_range g");
        if (r != 0) m.T->set({a, b}, {a - k, b + k}, r);
      }
  m.rho = geometric(Rational(1, 2), kappa);
  m.expected = {"mass preserving", "geometric products invariant on the truncation when g is compatible"};
  return m;
}

/// Block-size encoding of PushTASEP: a letter is the number of particles in front of an empty site.
/// Rightward jump (a,b) -> (a-1,b+1); a particle of the second block pushing left gives (a,b) -> (a+p,b-p).
inline ModelSpec pushtasep_blocks(int kappa) {
  if (kappa < 2) throw Error("pushtasep_blocks: kappa >= 2 required");
  ModelSpec m{"pushtasep_blocks", {{"kappa", std::to_string(kappa)}}, JumpRateMatrix<Rational>(kappa, 2), {}, {}, {}, {}, {}};
  for (int a = 0; a < kappa; ++a)
    for (int b = 0; b < kappa; ++b) {
      if (a >= 1 && b + 1 <= kappa - 1) m.T->add({a, b}, {a - 1, b + 1}, 1);
      for (int p = 1; p <= b; ++p)
        if (a + p <= kappa - 1) m.T->add({a, b}, {a + p, b - p}, 1);
    }
  m.rho = geometric(Rational(1, 2), kappa);
  m.expected = {"mass preserving", "geometric products balance on triples inside the truncation"};
  return m;
}

/// Three-colour range-3 system whose Markov law projects to a hidden Markov chain on two colours.
inline ModelSpec hmc_example() {
  ModelSpec m{"hmc_example", {}, JumpRateMatrix<Rational>(3, 3), {}, {}, {}, {}, {}};
  auto& T = *m.T;
  T.set({0, 0, 0}, {0, 1, 0}, 255);
  T.set({0, 0, 0}, {0, 2, 0}, 15);
  T.set({0, 1, 0}, {0, 0, 0}, 294);
  T.set({0, 2, 0}, {0, 0, 0}, 294);
  T.set({0, 1, 0}, {0, 2, 0}, 49);
  T.set({0, 2, 0}, {0, 1, 0}, 49);
  m.kernel = MarkovKernel<Rational>(3, 1,
                                    {{Rational(7, 15), Rational(1, 3), Rational(1, 5)},
                                     {Rational(1, 2), Rational(1, 6), Rational(1, 3)},
                                     {Rational(1, 6), Rational(1, 2), Rational(1, 3)}});
  m.rho = std::vector<Rational>{Rational(35, 89), Rational(29, 89), Rational(25, 89)};
  m.projection = std::vector<Letter>{0, 1, 1};
  m.expected = {"Z == 0 for the kernel", "projected rates 000->010 = 270 and 010->000 = 294",
                "projected law is not Markov: mu(111)/mu(11) = 71/106, mu(11)/mu(1) = 53/81"};
  return m;
}

/// kappa = 2, L = 2 with free rates t[x][y], x = (a,b)_2 and y = (c,d)_2.
inline ModelSpec kappa2_general(const std::map<std::pair<int, int>, Rational>& t) {
  ModelSpec m{"kappa2_general", {}, JumpRateMatrix<Rational>(2, 2), {}, {}, {}, {}, {}};
  for (const auto& [xy, r] : t) {
    if (xy.first < 0 || xy.first > 3 || xy.second < 0 || xy.second > 3) throw Error("kappa2_general: index out of range");
    if (xy.first == xy.second) {
      if (r != 0) throw Error("kappa2_general: diagonal rate");
      continue;
    }
    require_nonnegative(r, "kappa2_general rate");
    m.T->set_code(static_cast<WordCode>(xy.first), static_cast<WordCode>(xy.second), r);
    m.params["t" + std::to_string(xy.first) + std::to_string(xy.second)] = to_string(r);
  }
  m.expected = {"a product law is invariant iff NCycle_2 vanishes for it"};
  return m;
}

// Square patterns listed in row-major order (0,0),(0,1),(1,0),(1,1).

/// T[1110 -> 0001] = a, T[0001 -> 1110] = 1; Bernoulli(rho_1) invariant iff (a-1) rho_1^2 + 2 rho_1 - 1 = 0.
inline ModelSpec flip3_2d(const Rational& a) {
  if (!(a > 0)) throw Error("flip3_2d: a must be positive");
  ModelSpec m{"flip3_2d", {{"a", to_string(a)}}, {}, SquareJRM<Rational>(2), {}, {}, {}, {}};
  m.square->set({1, 1, 1, 0}, {0, 0, 0, 1}, a);
  m.square->set({0, 0, 0, 1}, {1, 1, 1, 0}, 1);
  m.expected = {"Bernoulli(1/(1+sqrt(a))) product invariant"};
  if (auto r = exact_sqrt(a)) m.rho = std::vector<Rational>{1 - 1 / (1 + *r), 1 / (1 + *r)};
  return m;
}

/// T[1010 -> 0101] = a, T[0101 -> 1010] = b: every product invariant iff a = b.
inline ModelSpec pair_flip_2d(const Rational& a, const Rational& b) {
  ModelSpec m{"pair_flip_2d", {{"a", to_string(a)}, {"b", to_string(b)}}, {}, SquareJRM<Rational>(2), {}, {}, {}, {}};
  require_nonnegative(a, "a");
  require_nonnegative(b, "b");
  m.square->set({1, 0, 1, 0}, {0, 1, 0, 1}, a);
  m.square->set({0, 1, 0, 1}, {1, 0, 1, 0}, b);
  m.rho = std::vector<Rational>{Rational(1, 2), Rational(1, 2)};
  m.expected = {a == b ? "every product invariant" : "no invariant product"};
  return m;
}

namespace detail {
// Cells in cyclic order around the square, as row-major indices.
inline constexpr std::array<int, 4> ring = {0, 1, 3, 2};
inline Word from_ring(const std::array<int, 4>& v) {
  Word w(4);
  for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(ring[static_cast<std::size_t>(i)])] = v[static_cast<std::size_t>(i)];
  return w;
}
}  // namespace detail

/// Two adjacent particles rotate one step around the square; rates a, b, c, d for the four positions.
inline ModelSpec rotation_2d(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
  ModelSpec m{"rotation_2d", {{"a", to_string(a)}, {"b", to_string(b)}, {"c", to_string(c)}, {"d", to_string(d)}}, {}, SquareJRM<Rational>(2), {}, {}, {}, {}};
  const std::array<std::array<int, 4>, 4> pos = {{{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}, {1, 0, 0, 1}}};
  const std::array<const Rational*, 4> rates = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i) {
    require_nonnegative(*rates[static_cast<std::size_t>(i)], "rotation rate");
    m.square->set(detail::from_ring(pos[static_cast<std::size_t>(i)]), detail::from_ring(pos[static_cast<std::size_t>((i + 1) % 4)]),
                  *rates[static_cast<std::size_t>(i)]);
  }
  bool eq = a == b && b == c && c == d;
  m.rho = std::vector<Rational>{Rational(1, 2), Rational(1, 2)};
  m.expected = {eq ? "every Bernoulli product invariant" : "no invariant product"};
  return m;
}

/// Single move T[1100 -> 0110] = 1 (cyclic order): no full-support product is invariant.
inline ModelSpec corner_move_2d() {
  ModelSpec m{"corner_move_2d", {}, {}, SquareJRM<Rational>(2), {}, {}, {}, {}};
  m.square->set(detail::from_ring({1, 1, 0, 0}), detail::from_ring({0, 1, 1, 0}), 1);
  m.rho = std::vector<Rational>{Rational(1, 2), Rational(1, 2)};
  m.expected = {"no full-support invariant product"};
  return m;
}

/// Three colours: T[iiii -> (i+1)^4] = a_i.
inline ModelSpec three_colour_2d(const Rational& a0, const Rational& a1, const Rational& a2) {
  ModelSpec m{"three_colour_2d", {{"a0", to_string(a0)}, {"a1", to_string(a1)}, {"a2", to_string(a2)}}, {}, SquareJRM<Rational>(3), {}, {}, {}, {}};
  const std::array<const Rational*, 3> a = {&a0, &a1, &a2};
  for (int i = 0; i < 3; ++i) {
    require_nonnegative(*a[static_cast<std::size_t>(i)], "a_i");
    int j = (i + 1) % 3;
    m.square->set({i, i, i, i}, {j, j, j, j}, *a[static_cast<std::size_t>(i)]);
  }
  m.rho = std::vector<Rational>(3, Rational(1, 3));
  m.expected = {"invariant products: a_0 rho_0^4 = a_1 rho_1^4 = a_2 rho_2^4"};
  return m;
}

/// Ball moved from urn i to one of the other three urns: rate W(total) x_i / 3. Truncated at kappa.
inline ModelSpec ball_move_2d(int kappa, const std::function<Rational(int)>& W) {
  ModelSpec m{"ball_move_2d", {{"kappa", std::to_string(kappa)}}, {}, SquareJRM<Rational>(kappa), {}, {}, {}, {}};
  for (WordCode code = 0; code < ipow(kappa, 4); ++code) {
    Word x = decode(code, kappa, 4);
    int total = 0;
    for (Letter v : x) total += v;
    for (std::size_t i = 0; i < 4; ++i) {
      if (x[i] == 0) continue;
      for (std::size_t j = 0; j < 4; ++j) {
        if (j == i || x[j] + 1 > kappa - 1) continue;
        Word y = x;
        --y[i];
        ++y[j];
        Rational r = W(total) * x[i] / 3;
        if (r != 0) m.square->add(x, y, r);
      }
    }
  }
  m.rho = truncated_poisson(Rational(1), kappa);
  m.expected = {"truncated Poisson products: bold-Z vanishes on squares with total mass <= kappa - 1"};
  return m;
}

/// Urns shifted one step around the square at rate W(total).
inline ModelSpec urn_shift_2d(int kappa, const std::function<Rational(int)>& W) {
  ModelSpec m{"urn_shift_2d", {{"kappa", std::to_string(kappa)}}, {}, SquareJRM<Rational>(kappa), {}, {}, {}, {}};
  for (WordCode code = 0; code < ipow(kappa, 4); ++code) {
    Word x = decode(code, kappa, 4);
    std::array<int, 4> r{}, s{};
    int total = 0;
    for (int i = 0; i < 4; ++i) {
      r[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(detail::ring[static_cast<std::size_t>(i)])];
      total += r[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>((i + 1) % 4)] = r[static_cast<std::size_t>(i)];
    Word y = detail::from_ring(s);
    if (y != x && W(total) != 0) m.square->add(x, y, W(total));
  }
  m.rho = std::vector<Rational>(static_cast<std::size_t>(kappa), Rational(1, kappa));
  m.expected = {"every product invariant (bold-Z == 0)"};
  return m;
}

}  // namespace models

/// Result of projecting a rate matrix through pi: the projected rates or a representative
/// dependence witness.
struct Projection {
  std::optional<JumpRateMatrix<Rational>> T;
  struct Violation {
    Word representative_a, representative_b, target;
    Rational rate_a, rate_b;
  };
  std::optional<Violation> violation;
  bool ok() const { return T.has_value(); }
};

/// T'[a -> c] = sum over representatives C of c of T[A -> C], required to be the same for every A over a.
/// Self-jumps of the projection are dropped.
template <class S = Rational>
Projection project_jrm(const JumpRateMatrix<Rational>& T, const std::vector<Letter>& pi) {
  const int k = T.kappa(), L = T.range();
  if (static_cast<int>(pi.size()) != k) throw Error("project_jrm: pi must map every letter");
  int kp = 0;
  for (Letter c : pi) {
    if (c < 0) throw Error("project_jrm: negative image");
    kp = std::max(kp, c + 1);
  }
  std::vector<char> hit(static_cast<std::size_t>(kp), 0);
  for (Letter c : pi) hit[static_cast<std::size_t>(c)] = 1;
  for (char h : hit)
    if (!h) throw Error("project_jrm: pi is not surjective");
  auto project = [&](const Word& w) {
    Word p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) p[i] = pi[static_cast<std::size_t>(w[i])];
    return p;
  };
  const WordCode nw = ipow(k, L), np = ipow(kp, L);
  // sums[A][c]
  std::vector<std::vector<Rational>> sums(nw, std::vector<Rational>(np, Rational(0)));
  for (const auto& [key, v] : T.entries())
    sums[key.first][encode(project(decode(key.second, k, L)), kp)] += v;
  std::vector<std::optional<WordCode>> first(np);
  Projection out;
  JumpRateMatrix<Rational> Tp(kp, L);
  for (WordCode A = 0; A < nw; ++A) {
    Word aw = decode(A, k, L);
    WordCode a = encode(project(aw), kp);
    if (!first[a]) {
      first[a] = A;
      for (WordCode c = 0; c < np; ++c)
        if (c != a) Tp.set_code(a, c, sums[A][c]);
      continue;
    }
    WordCode B = *first[a];
    for (WordCode c = 0; c < np; ++c)
      if (sums[A][c] != sums[B][c]) {
        out.violation = Projection::Violation{decode(B, k, L), aw, decode(c, kp, L), sums[B][c], sums[A][c]};
        return out;
      }
  }
  out.T = std::move(Tp);
  return out;
}

/// Law of the projected chain on a word: sum over preimages of rho_{x0} prod M.
inline Rational projected_probability(const StationaryLaw<Rational>& law, const std::vector<Letter>& pi, const Word& y) {
  if (law.memory() != 1) throw Error("projected_probability: memory-1 law required");
  const int k = law.kappa();
  std::vector<Rational> f(static_cast<std::size_t>(k), Rational(0));
  for (int a = 0; a < k; ++a)
    if (pi[static_cast<std::size_t>(a)] == y.at(0)) f[static_cast<std::size_t>(a)] = law.rho()[static_cast<std::size_t>(a)];
  for (std::size_t j = 1; j < y.size(); ++j) {
    std::vector<Rational> g(static_cast<std::size_t>(k), Rational(0));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        if (pi[static_cast<std::size_t>(b)] == y[j]) g[static_cast<std::size_t>(b)] += f[static_cast<std::size_t>(a)] * law.kernel()(a, b);
    f = std::move(g);
  }
  Rational s = 0;
  for (const auto& v : f) s += v;
  return s;
}

/// Residuals of NCycle_3 for a product law on a truncated mass-preserving system, split by
/// whether the triple's total mass stays inside the truncation.
template <class S>
struct TruncationResidual {
  S interior;
  S boundary;
  std::uint64_t interior_words = 0;
};

template <class S>
TruncationResidual<S> truncation_residual(const JumpRateMatrix<S>& T, const std::vector<S>& rho, const Tolerance& tol = {}) {
  if (T.range() != 2) throw Error("truncation_residual: range L = 2 required");
  auto z = z_table(product_context(T, rho, tol));
  const int k = T.kappa();
  TruncationResidual<S> out{S(0), S(0), 0};
  for (WordCode c = 0; c < ipow(k, 3); ++c) {
    Word x = decode(c, k, 3);
    S r = abs_value(ncycle(z, x));
    if (x[0] + x[1] + x[2] <= k - 1) {
      out.interior = std::max(out.interior, r);
      ++out.interior_words;
    } else {
      out.boundary = std::max(out.boundary, r);
    }
  }
  return out;
}

/// Catalog lookup by name with textual parameters (rationals as "p/q" or decimals).
inline ModelSpec build_model(const std::string& name, const std::map<std::string, std::string>& params) {
  auto get = [&](const std::string& key, const std::string& def) -> Rational {
    auto it = params.find(key);
    return parse_rational(it == params.end() ? def : it->second);
  };
  auto get_int = [&](const std::string& key, int def) {
    auto it = params.find(key);
    if (it == params.end()) return def;
    Rational r = parse_rational(it->second);
    if (denominator(r) != 1) throw Error("parameter " + key + " must be an integer");
    return static_cast<int>(numerator(r));
  };
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw Error("model " + name + " has no parameter '" + k + "'");
    }
  };
  if (name == "tasep") {
    check_keys({});
    return models::tasep();
  }
  if (name == "contact") {
    check_keys({"lambda", "range"});
    return models::contact(get("lambda", "1"), get_int("range", 2));
  }
  if (name == "voter") {
    check_keys({});
    return models::voter();
  }
  if (name == "stochastic_ising") {
    check_keys({"x"});
    return models::stochastic_ising(get("x", "1/2"));
  }
  if (name == "tasep3") {
    check_keys({"r10", "r20", "r21"});
    return models::tasep3(get("r10", "1"), get("r20", "1"), get("r21", "1"));
  }
  if (name == "tasep3_cyclic") {
    check_keys({"r02", "r10", "r21"});
    return models::tasep3(get("r02", "1"), get("r10", "1"), get("r21", "1"), models::Tasep3Variant::cyclic);
  }
  if (name == "zero_range") {
    check_keys({"kappa", "g"});
    Rational g = get("g", "1");
    return models::zero_range([g](int, int) { return g; }, get_int("kappa", 4));
  }
  if (name == "pushtasep_blocks") {
    check_keys({"kappa"});
    return models::pushtasep_blocks(get_int("kappa", 4));
  }
  if (name == "hmc_example") {
    check_keys({});
    return models::hmc_example();
  }
  if (name == "kappa2_general") {
    std::map<std::pair<int, int>, Rational> t;
    for (const auto& [k, v] : params) {
      if (k.size() != 3 || k[0] != 't' || k[1] < '0' || k[1] > '3' || k[2] < '0' || k[2] > '3')
        throw Error("kappa2_general parameters are t01 ... t32");
      t[{k[1] - '0', k[2] - '0'}] = parse_rational(v);
    }
    return models::kappa2_general(t);
  }
  if (name == "flip3_2d") {
    check_keys({"a"});
    return models::flip3_2d(get("a", "4"));
  }
  if (name == "pair_flip_2d") {
    check_keys({"a", "b"});
    return models::pair_flip_2d(get("a", "1"), get("b", "1"));
  }
  if (name == "rotation_2d") {
    check_keys({"a", "b", "c", "d"});
    return models::rotation_2d(get("a", "1"), get("b", "1"), get("c", "1"), get("d", "1"));
  }
  if (name == "corner_move_2d") {
    check_keys({});
    return models::corner_move_2d();
  }
  if (name == "three_colour_2d") {
    check_keys({"a0", "a1", "a2"});
    return models::three_colour_2d(get("a0", "1"), get("a1", "1"), get("a2", "1"));
  }
  if (name == "ball_move_2d" || name == "urn_shift_2d") {
    check_keys({"kappa", "w"});
    Rational w = get("w", "1");
    auto W = [w](int) { return w; };
    int k = get_int("kappa", 5);
    return name == "ball_move_2d" ? models::ball_move_2d(k, W) : models::urn_shift_2d(k, W);
  }
  throw Error("unknown model '" + name + "'");
}

inline std::vector<std::string> model_names() {
  return {"tasep", "contact", "voter", "stochastic_ising", "tasep3", "tasep3_cyclic", "zero_range", "pushtasep_blocks",
          "hmc_example", "kappa2_general", "flip3_2d", "pair_flip_2d", "rotation_2d", "corner_move_2d",
          "three_colour_2d", "ball_move_2d", "urn_shift_2d"};
}

}  // namespace ipsinv
