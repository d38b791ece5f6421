#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipsinv/core.hpp"
#include "ipsinv/numerics.hpp"

namespace ipsinv {

/// Binds (T, law) and the derived window sizes s = 2m + L and h = 4m + 2L - 1.
template <class S>
struct CriterionContext {
  JumpRateMatrix<S> T;
  StationaryLaw<S> law;
  Tolerance tol;
  int kappa, L, m, s, h;
  double zero_scale;

  CriterionContext(JumpRateMatrix<S> t, StationaryLaw<S> l, Tolerance tolerance = {})
      : T(std::move(t)), law(std::move(l)), tol(tolerance) {
    if (T.kappa() != law.kappa()) throw Error("rate matrix and kernel use different alphabets");
    if (!law.kernel().positive())
      throw Error("kernel has zero entries; restrict the alphabet with restrict_support first");
    kappa = T.kappa();
    L = T.range();
    m = law.memory();
    s = 2 * m + L;
    h = 4 * m + 2 * L - 1;
    zero_scale = 1.0 + to_double(T.max_rate());
  }

  bool zero(const S& v) const { return is_zero<S>(v, tol, zero_scale); }
};

/// Z over all words a(m) b(L) c(m) of length s.
template <class S>
class LocalBalanceTable {
 public:
  explicit LocalBalanceTable(CriterionContext<S> ctx) : ctx_(std::move(ctx)) {
    const auto& M = ctx_.law.kernel();
    const auto& T = ctx_.T;
    const std::size_t m = static_cast<std::size_t>(ctx_.m), L = static_cast<std::size_t>(ctx_.L);
    WordCode n = ipow(ctx_.kappa, ctx_.s);
    values_.assign(n, S(0));
    for (WordCode code = 0; code < n; ++code) {
      Word w = decode(code, ctx_.kappa, ctx_.s);
      WordCode b = encode(subword(w, m, L), ctx_.kappa);
      S acc = -T.exit_rate(b);
      const auto& in = T.incoming(b);
      if (!in.empty()) {
        S den = M.chain_product(w);
        Word v = w;
        for (const auto& [u, rate] : in) {
          Word uw = decode(u, ctx_.kappa, ctx_.L);
          std::copy(uw.begin(), uw.end(), v.begin() + static_cast<std::ptrdiff_t>(m));
          acc += rate * M.chain_product(v) / den;
        }
      }
      values_[code] = acc;
    }
  }

  const CriterionContext<S>& context() const { return ctx_; }
  int window() const { return ctx_.s; }
  const S& operator[](WordCode code) const { return values_[code]; }
  const S& at(const Word& w) const {
    if (static_cast<int>(w.size()) != ctx_.s) throw Error("Z index must have length s");
    return values_[encode(w, ctx_.kappa)];
  }
  const std::vector<S>& values() const { return values_; }
  bool identically_zero() const {
    for (const auto& v : values_)
      if (!ctx_.zero(v)) return false;
    return true;
  }

 private:
  CriterionContext<S> ctx_;
  std::vector<S> values_;
};

template <class S>
LocalBalanceTable<S> z_table(const CriterionContext<S>& ctx) {
  return LocalBalanceTable<S>(ctx);
}

namespace detail {

template <class S>
S window_sum(const LocalBalanceTable<S>& z, const Word& x) {
  std::size_t s = static_cast<std::size_t>(z.window());
  S acc(0);
  for (std::size_t i = 0; i + s <= x.size(); ++i) acc += z.at(subword(x, i, s));
  return acc;
}

}  // namespace detail

/// Cycle_n(x)/Gibbs-weight(x) summed over configurations; used when n < m + L.
template <class S>
S direct_ncycle(const CriterionContext<S>& ctx, const Word& x) {
  const auto& M = ctx.law.kernel();
  int n = static_cast<int>(x.size());
  WordCode total = ipow(ctx.kappa, n);
  S in(0), out(0);
  for (WordCode c = 0; c < total; ++c) {
    Word w = decode(c, ctx.kappa, n);
    if (w == x) continue;
    S r_in = induced_rate_cyclic(ctx.T, w, x);
    if (r_in != 0) in += cyclic_chain_product(M, w) * r_in;
    out += induced_rate_cyclic(ctx.T, x, w);
  }
  S wx = cyclic_chain_product(M, x);
  return in / wx - out;
}

/// Normalized cycle balance: the Z-window sum for n >= m + L, direct summation below.
template <class S>
S ncycle(const LocalBalanceTable<S>& z, const Word& x) {
  const auto& ctx = z.context();
  std::size_t n = x.size();
  if (n == 0) throw Error("ncycle: empty word");
  if (static_cast<int>(n) < ctx.m + ctx.L) return direct_ncycle(ctx, x);
  std::size_t s = static_cast<std::size_t>(ctx.s);
  S acc(0);
  for (std::size_t j = 0; j < n; ++j) acc += z[encode(cyclic_subword(x, j, s), ctx.kappa)];
  return acc;
}

/// Cyclic sum of Z over the n windows of x, for every n >= 1 (windows wrap as often as needed).
template <class S>
S ncycle_z(const LocalBalanceTable<S>& z, const Word& x) {
  const auto& ctx = z.context();
  if (x.empty()) throw Error("ncycle_z: empty word");
  std::size_t s = static_cast<std::size_t>(ctx.s);
  S acc(0);
  for (std::size_t j = 0; j < x.size(); ++j) acc += z[encode(cyclic_subword(x, j, s), ctx.kappa)];
  return acc;
}

template <class S>
S master(const LocalBalanceTable<S>& z, const Word& x) {
  const auto& ctx = z.context();
  if (static_cast<int>(x.size()) != ctx.h) throw Error("master: word length must be h");
  Word y = x;
  y.erase(y.begin() + (ctx.s - 1));
  return detail::window_sum(z, x) - detail::window_sum(z, y);
}

template <class S>
S replace(const LocalBalanceTable<S>& z, const Word& x, Letter letter) {
  const auto& ctx = z.context();
  if (static_cast<int>(x.size()) != ctx.h) throw Error("replace: word length must be h");
  Word y = x;
  y[static_cast<std::size_t>(ctx.s - 1)] = letter;
  return detail::window_sum(z, x) - detail::window_sum(z, y);
}

/// Line balance of the Markov law on a length-n word, divided by the chain weight
/// prod_{k} M(x[k..k+m]). Each window is marginalized over the outside letters it touches.
template <class S>
S nline(const LocalBalanceTable<S>& z, const Word& x) {
  const auto& ctx = z.context();
  const auto& law = ctx.law;
  const auto& M = law.kernel();
  const int n = static_cast<int>(x.size()), m = ctx.m, L = ctx.L, k = ctx.kappa;
  if (n < 1) throw Error("nline: empty word");
  S total(0);
  for (int j = -(L - 1); j <= n - 1; ++j) {
    int lo = j - m, hi = j + L - 1 + m;
    int q = std::min(0, lo), p = std::max(n - 1, hi);
    int left = -q, right = p - (n - 1);
    WordCode ext = ipow(k, left + right);
    Word w(static_cast<std::size_t>(p - q + 1));
    std::copy(x.begin(), x.end(), w.begin() + left);
    for (WordCode e = 0; e < ext; ++e) {
      Word ew = decode(e, k, left + right);
      for (int i = 0; i < left; ++i) w[static_cast<std::size_t>(i)] = ew[static_cast<std::size_t>(i)];
      for (int i = 0; i < right; ++i)
        w[static_cast<std::size_t>(left + n + i)] = ew[static_cast<std::size_t>(left + i)];
      S weight = law.block(w, 0);
      for (int kk = q; kk <= p - m; ++kk) {
        if (kk >= 0 && kk <= n - 1 - m) continue;  // cancels with the normalization
        weight *= M.window(w, static_cast<std::size_t>(kk - q));
      }
      total += weight * z.at(subword(w, static_cast<std::size_t>(lo - q), static_cast<std::size_t>(ctx.s)));
    }
  }
  return total;
}

/// sum over middle words b of Z(a b c) * chain_product(a b c); zero for every T.
template <class S>
S balanced_sum(const LocalBalanceTable<S>& z, const Word& a, const Word& c) {
  const auto& ctx = z.context();
  if (static_cast<int>(a.size()) != ctx.m || static_cast<int>(c.size()) != ctx.m)
    throw Error("balanced_sum: context words must have length m");
  const auto& M = ctx.law.kernel();
  WordCode nb = ipow(ctx.kappa, ctx.L);
  S total(0);
  for (WordCode b = 0; b < nb; ++b) {
    Word w = concat(concat(a, decode(b, ctx.kappa, ctx.L)), c);
    total += z.at(w) * M.chain_product(w);
  }
  return total;
}

enum class Verdict { invariant, not_invariant };

inline const char* to_string(Verdict v) { return v == Verdict::invariant ? "invariant" : "not-invariant"; }

template <class S>
struct Witness {
  Word word;
  std::string criterion;
  S residual;
  std::optional<Letter> replacement;
};

/// W over words of length s - 1 with Z(w) = W(suffix) - W(prefix).
template <class S>
struct PotentialCertificate {
  int kappa = 2;
  int length = 1;
  std::vector<S> W;

  const S& operator()(const Word& w) const { return W[encode(w, kappa)]; }
};

template <class S>
struct CriterionReport {
  Verdict verdict = Verdict::invariant;
  std::string criterion;
  std::uint64_t words_enumerated = 0;
  std::optional<Witness<S>> witness;
  std::optional<PotentialCertificate<S>> certificate;
  std::vector<std::string> criteria_evaluated;
  std::vector<std::string> notes;

  bool invariant() const { return verdict == Verdict::invariant; }
};

/// W(y) = sum_{i=1}^{s-1} Z(0^{s-i} y[1..i]).
template <class S>
PotentialCertificate<S> potential_from_z(const LocalBalanceTable<S>& z) {
  const auto& ctx = z.context();
  int len = ctx.s - 1;
  PotentialCertificate<S> cert{ctx.kappa, len, {}};
  WordCode n = ipow(ctx.kappa, len);
  cert.W.assign(n, S(0));
  for (WordCode c = 0; c < n; ++c) {
    Word y = decode(c, ctx.kappa, len);
    S acc(0);
    for (int i = 1; i <= len; ++i) {
      Word w(static_cast<std::size_t>(ctx.s - i), 0);
      w.insert(w.end(), y.begin(), y.begin() + i);
      acc += z.at(w);
    }
    cert.W[c] = acc;
  }
  return cert;
}

/// First word w of length s (lex order) with Z(w) != W(suffix) - W(prefix).
template <class S>
std::optional<Word> certificate_violation(const LocalBalanceTable<S>& z, const PotentialCertificate<S>& cert) {
  const auto& ctx = z.context();
  std::size_t len = static_cast<std::size_t>(cert.length);
  for (WordCode c = 0; c < z.values().size(); ++c) {
    Word w = decode(c, ctx.kappa, ctx.s);
    S d = z[c] - (cert(subword(w, 1, len)) - cert(subword(w, 0, len)));
    if (!ctx.zero(d)) return w;
  }
  return std::nullopt;
}

/// Line invariance decision via NCycle_h on the words a[1..s] 0^{s-1}, with certificate.
template <class S>
CriterionReport<S> check_markov_line(const LocalBalanceTable<S>& z) {
  const auto& ctx = z.context();
  CriterionReport<S> rep;
  rep.criterion = "ncycle_h(a.0^(s-1))";
  rep.criteria_evaluated.push_back(rep.criterion);
  WordCode n = ipow(ctx.kappa, ctx.s);
  for (WordCode c = 0; c < n; ++c) {
    Word x = decode(c, ctx.kappa, ctx.s);
    x.resize(static_cast<std::size_t>(ctx.h), 0);
    S r = ncycle(z, x);
    ++rep.words_enumerated;
    if (!ctx.zero(r)) {
      rep.verdict = Verdict::not_invariant;
      rep.witness = Witness<S>{x, rep.criterion, r, std::nullopt};
      return rep;
    }
  }
  auto cert = potential_from_z(z);
  rep.criteria_evaluated.push_back("potential certificate");
  if (auto bad = certificate_violation(z, cert)) {
    // Only reachable in float mode when the tolerance is too loose.
    rep.verdict = Verdict::not_invariant;
    rep.witness = Witness<S>{*bad, "potential certificate", z.at(*bad), std::nullopt};
    rep.notes.push_back("criterion passed within tolerance but the certificate check failed");
    return rep;
  }
  rep.certificate = std::move(cert);
  return rep;
}

template <class S>
CriterionReport<S> check_markov_line(const CriterionContext<S>& ctx) {
  return check_markov_line(z_table(ctx));
}

/// NCycle_n == 0 over all kappa^n cyclic words.
template <class S>
CriterionReport<S> check_markov_cycle(const LocalBalanceTable<S>& z, int n) {
  const auto& ctx = z.context();
  if (n < 1) throw Error("cycle length must be >= 1");
  CriterionReport<S> rep;
  rep.criterion = "ncycle_" + std::to_string(n);
  rep.criteria_evaluated.push_back(rep.criterion);
  WordCode total = ipow(ctx.kappa, n);
  for (WordCode c = 0; c < total; ++c) {
    Word x = decode(c, ctx.kappa, n);
    S r = ncycle(z, x);
    ++rep.words_enumerated;
    if (!ctx.zero(r)) {
      rep.verdict = Verdict::not_invariant;
      rep.witness = Witness<S>{x, rep.criterion, r, std::nullopt};
      return rep;
    }
  }
  return rep;
}

template <class S>
CriterionReport<S> check_markov_cycle(const CriterionContext<S>& ctx, int n) {
  return check_markov_cycle(z_table(ctx), n);
}

/// Z-window cycle sums vanish for every n <= kappa^m. Necessary for line invariance; see README
/// for instances where it holds while the line criterion fails.
template <class S>
CriterionReport<S> check_markov_small_cycles(const LocalBalanceTable<S>& z) {
  const auto& ctx = z.context();
  CriterionReport<S> rep;
  rep.criterion = "ncycle_n, n <= kappa^m";
  WordCode bound = ipow(ctx.kappa, ctx.m);
  for (WordCode n = 1; n <= bound; ++n) {
    std::string name = "ncycle_" + std::to_string(n);
    rep.criteria_evaluated.push_back(name);
    WordCode total = ipow(ctx.kappa, static_cast<int>(n));
    for (WordCode c = 0; c < total; ++c) {
      Word x = decode(c, ctx.kappa, static_cast<int>(n));
      S r = ncycle_z(z, x);
      ++rep.words_enumerated;
      if (!ctx.zero(r)) {
        rep.verdict = Verdict::not_invariant;
        rep.witness = Witness<S>{x, name, r, std::nullopt};
        return rep;
      }
    }
  }
  return rep;
}

template <class S>
CriterionContext<S> product_context(const JumpRateMatrix<S>& T, const std::vector<S>& rho, const Tolerance& tol = {}) {
  if (static_cast<int>(rho.size()) != T.kappa()) throw Error("rho has wrong size");
  for (const auto& v : rho)
    if (!(v > 0)) throw Error("rho must have full support; use restrict_support for partial supports");
  return CriterionContext<S>(T, StationaryLaw<S>::product(rho, tol), tol);
}

/// Product measure rho^Z on the line: NCycle_3 on (a,b,0) for L = 2 and certificate W(a) = Z(0,a).
template <class S>
CriterionReport<S> check_product_line(const JumpRateMatrix<S>& T, const std::vector<S>& rho, const Tolerance& tol = {}) {
  return check_markov_line(z_table(product_context(T, rho, tol)));
}

template <class S>
CriterionReport<S> check_product_cycle(const JumpRateMatrix<S>& T, const std::vector<S>& rho, int n, const Tolerance& tol = {}) {
  return check_markov_cycle(z_table(product_context(T, rho, tol)), n);
}

/// Booleans of the nine equivalent line-invariance predicates, plus the cycle-length pairs for (L,m) = (2,1).
struct EquivalenceReport {
  static constexpr std::array<const char*, 9> names = {
      "(i) nline_n == 0 for 1 <= n <= h",
      "(ii) replace_h(a.0^(s-1); 0) == 0",
      "(iii) replace_h == 0",
      "(iv) master_h(a.0^(s-1)) == 0",
      "(v) master_h == 0",
      "(vi) ncycle_n == 0 for m+L <= n <= h+1",
      "(vii) ncycle_h == 0",
      "(viii) ncycle_h(a.0^(s-1)) == 0",
      "(ix) potential W exists",
  };
  std::array<bool, 9> predicates{};
  bool cycle_pairs_applicable = false;
  bool ncycle7 = false, ncycle65 = false, ncycle64 = false, ncycle456 = false;

  bool predicates_agree() const {
    for (bool b : predicates)
      if (b != predicates[0]) return false;
    return true;
  }
  bool cycle_pairs_agree() const {
    return !cycle_pairs_applicable || (ncycle7 == ncycle65 && ncycle7 == ncycle64 && ncycle7 == ncycle456);
  }
};

template <class S>
EquivalenceReport check_master_replace_equivalences(const LocalBalanceTable<S>& z) {
  const auto& ctx = z.context();
  const int k = ctx.kappa, s = ctx.s, h = ctx.h;
  EquivalenceReport rep;
  auto all_words = [&](int len, auto&& pred) {
    WordCode n = ipow(k, len);
    for (WordCode c = 0; c < n; ++c)
      if (!pred(decode(c, k, len))) return false;
    return true;
  };
  auto padded = [&](auto&& pred) {
    return all_words(s, [&](Word x) {
      x.resize(static_cast<std::size_t>(h), 0);
      return pred(x);
    });
  };
  auto cyc = [&](int n) { return all_words(n, [&](const Word& x) { return ctx.zero(ncycle(z, x)); }); };

  rep.predicates[0] = true;
  for (int n = 1; n <= h && rep.predicates[0]; ++n)
    rep.predicates[0] = all_words(n, [&](const Word& x) { return ctx.zero(nline(z, x)); });
  rep.predicates[1] = padded([&](const Word& x) { return ctx.zero(replace(z, x, 0)); });
  rep.predicates[2] = all_words(h, [&](const Word& x) {
    for (Letter y = 0; y < k; ++y)
      if (!ctx.zero(replace(z, x, y))) return false;
    return true;
  });
  rep.predicates[3] = padded([&](const Word& x) { return ctx.zero(master(z, x)); });
  rep.predicates[4] = all_words(h, [&](const Word& x) { return ctx.zero(master(z, x)); });
  rep.predicates[5] = true;
  for (int n = ctx.m + ctx.L; n <= h + 1 && rep.predicates[5]; ++n) rep.predicates[5] = cyc(n);
  rep.predicates[6] = cyc(h);
  rep.predicates[7] = padded([&](const Word& x) { return ctx.zero(ncycle(z, x)); });
  rep.predicates[8] = !certificate_violation(z, potential_from_z(z)).has_value();

  if (ctx.L == 2 && ctx.m == 1) {
    rep.cycle_pairs_applicable = true;
    bool c4 = cyc(4), c5 = cyc(5), c6 = cyc(6);
    rep.ncycle7 = rep.predicates[6];
    rep.ncycle65 = c6 && c5;
    rep.ncycle64 = c6 && c4;
    rep.ncycle456 = c4 && c5 && c6;
  }
  return rep;
}

template <class S>
EquivalenceReport check_master_replace_equivalences(const CriterionContext<S>& ctx) {
  return check_master_replace_equivalences(z_table(ctx));
}

/// Pair rates p(delta) on Z^d with finite range.
template <class S>
struct PairRateField {
  int dim = 1;
  std::map<std::vector<int>, S> p;

  int radius() const {
    int r = 0;
    for (const auto& [d, v] : p) {
      int n = 0;
      for (int x : d) n += std::abs(x);
      if (v != 0) r = std::max(r, n + 1);
    }
    return r;
  }
  bool zero() const {
    for (const auto& [d, v] : p)
      if (v != 0) return false;
    return true;
  }
  bool symmetric() const {
    for (const auto& [d, v] : p) {
      std::vector<int> nd(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) nd[i] = -d[i];
      auto it = p.find(nd);
      S o = it == p.end() ? S(0) : it->second;
      if (o != v) return false;
    }
    return true;
  }
};

/// Product invariance on a graph with pair rates p: NCycle_2 == 0 when p is symmetric,
/// the line criterion otherwise.
template <class S>
CriterionReport<S> check_product_general_graph(const JumpRateMatrix<S>& T, const std::vector<S>& rho,
                                               const PairRateField<S>& p, const Tolerance& tol = {}) {
  if (T.range() != 2) throw Error("pair-rate graphs need range L = 2");
  if (p.zero()) {
    (void)product_context(T, rho, tol);
    CriterionReport<S> rep;
    rep.criterion = "p == 0";
    rep.notes.push_back("no pair carries a positive rate");
    return rep;
  }
  if (p.symmetric()) return check_markov_cycle(z_table(product_context(T, rho, tol)), 2);
  return check_product_line(T, rho, tol);
}

/// S[(a,b) -> (c,d)] = T[(a,b) -> (c,d)] + T[(b,a) -> (d,c)].
template <class S>
JumpRateMatrix<S> symmetrize(const JumpRateMatrix<S>& T) {
  if (T.range() != 2) throw Error("symmetrize needs range L = 2");
  JumpRateMatrix<S> out(T.kappa(), 2);
  for (const auto& [key, v] : T.entries()) {
    Word a = decode(key.first, T.kappa(), 2), b = decode(key.second, T.kappa(), 2);
    out.add(a, b, v);
    out.add({a[1], a[0]}, {b[1], b[0]}, v);
  }
  return out;
}

template <class S>
struct SupportRestriction {
  bool closed = false;
  std::vector<Letter> support;
  std::optional<std::pair<Word, Word>> escape;
  std::optional<JumpRateMatrix<S>> T;
  std::optional<StationaryLaw<S>> law;
  /// |S| = 1: the Dirac measure, invariant exactly when closed.
  bool dirac = false;
};

namespace detail {

template <class S>
SupportRestriction<S> restrict_rates(const JumpRateMatrix<S>& T, std::vector<Letter> support) {
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const int k = T.kappa(), L = T.range();
  if (support.empty() || static_cast<int>(support.size()) >= k)
    throw Error("support must be a nonempty strict subset of the alphabet");
  for (Letter a : support)
    if (a < 0 || a >= k) throw Error("support letter outside alphabet");
  std::vector<int> index(static_cast<std::size_t>(k), -1);
  for (std::size_t i = 0; i < support.size(); ++i) index[static_cast<std::size_t>(support[i])] = static_cast<int>(i);
  auto inside = [&](const Word& w) {
    for (Letter a : w)
      if (index[static_cast<std::size_t>(a)] < 0) return false;
    return true;
  };
  SupportRestriction<S> out;
  out.support = support;
  for (const auto& [key, v] : T.entries()) {
    Word a = decode(key.first, k, L), b = decode(key.second, k, L);
    if (inside(a) && !inside(b)) {
      out.escape = std::make_pair(a, b);
      return out;
    }
  }
  out.closed = true;
  out.dirac = support.size() == 1;
  if (!out.dirac) {
    JumpRateMatrix<S> r(static_cast<int>(support.size()), L);
    for (const auto& [key, v] : T.entries()) {
      Word a = decode(key.first, k, L), b = decode(key.second, k, L);
      if (!inside(a)) continue;
      for (auto& x : a) x = index[static_cast<std::size_t>(x)];
      for (auto& x : b) x = index[static_cast<std::size_t>(x)];
      r.set(a, b, v);
    }
    out.T = std::move(r);
  }
  return out;
}

}  // namespace detail

/// Product measure with support S: closure condition, then the instance re-indexed over S.
template <class S>
SupportRestriction<S> restrict_support(const JumpRateMatrix<S>& T, const std::vector<S>& rho,
                                       const std::vector<Letter>& support, const Tolerance& tol = {}) {
  auto out = detail::restrict_rates(T, support);
  if (!out.closed || out.dirac) return out;
  std::vector<S> r;
  for (Letter a : out.support) r.push_back(rho.at(static_cast<std::size_t>(a)));
  S sum(0);
  for (const auto& v : r) sum += v;
  for (auto& v : r) v /= sum;
  out.law = StationaryLaw<S>::product(r, tol);
  return out;
}

/// Markov analogue: the kernel restricted to S must be positive and stochastic on S.
template <class S>
SupportRestriction<S> restrict_support(const JumpRateMatrix<S>& T, const MarkovKernel<S>& M,
                                       const std::vector<Letter>& support, const Tolerance& tol = {}) {
  auto out = detail::restrict_rates(T, support);
  if (!out.closed || out.dirac) return out;
  const int k = M.kappa(), m = M.memory(), ks = static_cast<int>(out.support.size());
  std::vector<std::vector<S>> rows;
  WordCode nctx = ipow(ks, m);
  for (WordCode c = 0; c < nctx; ++c) {
    Word ctxw = decode(c, ks, m);
    for (auto& x : ctxw) x = out.support[static_cast<std::size_t>(x)];
    WordCode oc = encode(ctxw, k);
    std::vector<S> row;
    for (Letter y : out.support) {
      if (!(M(oc, y) > 0)) throw Error("kernel is not positive on the support");
      row.push_back(M(oc, y));
    }
    rows.push_back(std::move(row));
  }
  MarkovKernel<S> Mr(ks, m, std::move(rows), tol);
  out.law = stationary_distribution(Mr, tol);
  return out;
}

/// Local reversibility: wt(a u c) T[u -> b] = wt(a b c) T[b -> u] for all a, c of length m.
/// Sufficient for Z == 0, not necessary.
template <class S>
bool locally_reversible(const CriterionContext<S>& ctx) {
  const auto& M = ctx.law.kernel();
  const int k = ctx.kappa, m = ctx.m, L = ctx.L;
  WordCode nctx = ipow(k, m);
  for (const auto& [key, v] : ctx.T.entries()) {
    Word u = decode(key.first, k, L), b = decode(key.second, k, L);
    S back = ctx.T.rate_code(key.second, key.first);
    for (WordCode a = 0; a < nctx; ++a)
      for (WordCode c = 0; c < nctx; ++c) {
        Word aw = decode(a, k, m), cw = decode(c, k, m);
        S lhs = M.chain_product(concat(concat(aw, u), cw)) * v;
        S rhs = M.chain_product(concat(concat(aw, b), cw)) * back;
        if (!ctx.zero(lhs - rhs)) return false;
      }
  }
  return true;
}

/// Advisory sup-bounds over a truncated alphabet (never used as a proof).
template <class S>
struct TruncationAdvisory {
  S c1;  // sup over windows of the weighted incoming rate
  S c2;  // sup of exit rates
};

template <class S>
TruncationAdvisory<S> truncation_advisory(const LocalBalanceTable<S>& z) {
  const auto& ctx = z.context();
  TruncationAdvisory<S> out{S(0), S(0)};
  for (WordCode c = 0; c < z.values().size(); ++c) {
    Word w = decode(c, ctx.kappa, ctx.s);
    WordCode b = encode(subword(w, static_cast<std::size_t>(ctx.m), static_cast<std::size_t>(ctx.L)), ctx.kappa);
    out.c1 = std::max(out.c1, S(z[c] + ctx.T.exit_rate(b)));
    out.c2 = std::max(out.c2, ctx.T.exit_rate(b));
  }
  return out;
}

}  // namespace ipsinv
