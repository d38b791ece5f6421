#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "ipsinv/core.hpp"
#include "ipsinv/criteria.hpp"

namespace ipsinv {

enum class SpaceKind { cycle, segment, torus, pair_cycle };

struct Space {
  SpaceKind kind = SpaceKind::cycle;
  int n = 1;
  int dim = 1;

  std::size_t sites() const { return kind == SpaceKind::torus ? static_cast<std::size_t>(n * n) : static_cast<std::size_t>(n); }
};

struct OracleLimits {
  WordCode max_states = WordCode(1) << 20;
};

/// Explicit rate matrix of the particle system on a finite configuration space.
/// States are base-kappa codes of the site sequence (site 1 / cell (0,0) most significant).
template <class S>
struct FiniteGenerator {
  int kappa = 2;
  Space space;
  WordCode num_states = 0;
  std::vector<std::vector<std::pair<WordCode, S>>> rows;  // off-diagonal, sorted by target
  std::vector<S> diagonal;

  S rate(WordCode x, WordCode y) const {
    if (x == y) return diagonal[x];
    for (const auto& [t, v] : rows[x])
      if (t == y) return v;
    return S(0);
  }
  Word state(WordCode x) const { return decode(x, kappa, static_cast<int>(space.sites())); }
};

namespace detail {

inline WordCode checked_states(int kappa, std::size_t sites, const OracleLimits& lim) {
  WordCode n;
  try {
    n = ipow(kappa, static_cast<int>(sites));
  } catch (const ResourceCapExceeded&) {
    throw ResourceCapExceeded("configuration space exceeds the state cap");
  }
  if (n > lim.max_states)
    throw ResourceCapExceeded("configuration space has " + std::to_string(n) + " states, cap is " +
                              std::to_string(lim.max_states));
  return n;
}

template <class S>
void finalize_row(FiniteGenerator<S>& G, WordCode x, std::vector<std::pair<WordCode, S>>& row) {
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<WordCode, S>> merged;
  for (auto& e : row) {
    if (!merged.empty() && merged.back().first == e.first)
      merged.back().second += e.second;
    else
      merged.push_back(e);
  }
  S out(0);
  for (const auto& e : merged) out += e.second;
  G.diagonal[x] = -out;
  G.rows[x] = std::move(merged);
}

// Applies every window (list of distinct sites) of a rate matrix to every configuration.
template <class S>
void apply_windows(FiniteGenerator<S>& G, const JumpRateMatrix<S>& T, const std::vector<std::vector<std::size_t>>& windows,
                   std::vector<std::vector<std::pair<WordCode, S>>>& pending) {
  const int k = G.kappa;
  const std::size_t sites = G.space.sites();
  std::vector<WordCode> place(sites);
  for (std::size_t i = 0; i < sites; ++i) place[i] = ipow(k, static_cast<int>(sites - 1 - i));
  for (WordCode x = 0; x < G.num_states; ++x) {
    Word cfg = decode(x, k, static_cast<int>(sites));
    for (const auto& win : windows) {
      WordCode wc = 0;
      for (std::size_t p : win) wc = wc * static_cast<WordCode>(k) + static_cast<WordCode>(cfg[p]);
      for (const auto& [to, rate] : T.outgoing(wc)) {
        Word tw = decode(to, k, static_cast<int>(win.size()));
        WordCode y = x;
        for (std::size_t i = 0; i < win.size(); ++i) {
          y -= static_cast<WordCode>(cfg[win[i]]) * place[win[i]];
          y += static_cast<WordCode>(tw[i]) * place[win[i]];
        }
        pending[x].emplace_back(y, rate);
      }
    }
  }
}

template <class S>
FiniteGenerator<S> empty_generator(int kappa, Space space, const OracleLimits& lim) {
  FiniteGenerator<S> G;
  G.kappa = kappa;
  G.space = space;
  G.num_states = checked_states(kappa, space.sites(), lim);
  G.rows.resize(G.num_states);
  G.diagonal.assign(G.num_states, S(0));
  return G;
}

template <class S>
void finalize(FiniteGenerator<S>& G, std::vector<std::vector<std::pair<WordCode, S>>>& pending) {
  for (WordCode x = 0; x < G.num_states; ++x) finalize_row(G, x, pending[x]);
}

}  // namespace detail

/// PS on Z/nZ; rates equal induced_rate_cyclic.
template <class S>
FiniteGenerator<S> build_cycle_generator(const JumpRateMatrix<S>& T, int n, const OracleLimits& lim = {}) {
  if (n < 1) throw Error("cycle length must be >= 1");
  auto G = detail::empty_generator<S>(T.kappa(), Space{SpaceKind::cycle, n, 1}, lim);
  std::vector<std::vector<std::pair<WordCode, S>>> pending(G.num_states);
  const std::size_t L = static_cast<std::size_t>(T.range()), N = static_cast<std::size_t>(n);
  if (N >= L) {
    std::vector<std::vector<std::size_t>> windows;
    for (std::size_t a = 0; a < N; ++a) {
      std::vector<std::size_t> w;
      for (std::size_t i = 0; i < L; ++i) w.push_back((a + i) % N);
      windows.push_back(std::move(w));
    }
    detail::apply_windows(G, T, windows, pending);
  } else {
    // Wrapped windows revisit sites; use the definition pairwise.
    for (WordCode x = 0; x < G.num_states; ++x)
      for (WordCode y = 0; y < G.num_states; ++y) {
        if (x == y) continue;
        S r = induced_rate_cyclic(T, G.state(x), G.state(y));
        if (r != 0) pending[x].emplace_back(y, r);
      }
  }
  detail::finalize(G, pending);
  return G;
}

/// PS on [1,n]: windows inside the segment plus beta^l on the first L-1 sites and beta^r on the last L-1.
template <class S>
FiniteGenerator<S> build_segment_generator(const JumpRateMatrix<S>& T, const BoundaryRates<S>* beta, int n,
                                           const OracleLimits& lim = {}) {
  if (n < 1) throw Error("segment length must be >= 1");
  auto G = detail::empty_generator<S>(T.kappa(), Space{SpaceKind::segment, n, 1}, lim);
  std::vector<std::vector<std::pair<WordCode, S>>> pending(G.num_states);
  const std::size_t L = static_cast<std::size_t>(T.range()), N = static_cast<std::size_t>(n);
  std::vector<std::vector<std::size_t>> windows;
  for (std::size_t a = 0; a + L <= N; ++a) {
    std::vector<std::size_t> w;
    for (std::size_t i = 0; i < L; ++i) w.push_back(a + i);
    windows.push_back(std::move(w));
  }
  detail::apply_windows(G, T, windows, pending);
  if (beta) {
    std::size_t b = static_cast<std::size_t>(beta->left.range());
    if (b > N) throw Error("segment shorter than the boundary range");
    std::vector<std::size_t> lw, rw;
    for (std::size_t i = 0; i < b; ++i) {
      lw.push_back(i);
      rw.push_back(N - b + i);
    }
    detail::apply_windows(G, beta->left, {lw}, pending);
    detail::apply_windows(G, beta->right, {rw}, pending);
  }
  detail::finalize(G, pending);
  return G;
}

/// PS on the n x n torus driven by 2x2 square windows; `square` has range 4 with cells
/// in row-major order (0,0),(0,1),(1,0),(1,1).
template <class S>
FiniteGenerator<S> build_torus_generator(const JumpRateMatrix<S>& square, int n, const OracleLimits& lim = {}) {
  if (square.range() != 4) throw Error("torus generator expects 2x2 square patterns");
  if (n < 2) throw Error("torus side must be >= 2");
  auto G = detail::empty_generator<S>(square.kappa(), Space{SpaceKind::torus, n, 2}, lim);
  std::vector<std::vector<std::pair<WordCode, S>>> pending(G.num_states);
  std::vector<std::vector<std::size_t>> windows;
  const std::size_t N = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      std::vector<std::size_t> w;
      for (std::size_t di = 0; di < 2; ++di)
        for (std::size_t dj = 0; dj < 2; ++dj) w.push_back(((i + di) % N) * N + (j + dj) % N);
      windows.push_back(std::move(w));
    }
  detail::apply_windows(G, square, windows, pending);
  detail::finalize(G, pending);
  return G;
}

/// PS on Z/nZ where each pair (i, i+d) is updated by T at rate p(d).
template <class S>
FiniteGenerator<S> build_pair_rate_cycle_generator(const JumpRateMatrix<S>& T, const PairRateField<S>& p, int n,
                                                   const OracleLimits& lim = {}) {
  if (T.range() != 2 || p.dim != 1) throw Error("pair-rate cycle needs L = 2 and one-dimensional offsets");
  auto G = detail::empty_generator<S>(T.kappa(), Space{SpaceKind::pair_cycle, n, 1}, lim);
  std::vector<std::vector<std::pair<WordCode, S>>> pending(G.num_states);
  for (const auto& [d, v] : p.p) {
    if (v == 0) continue;
    int off = ((d[0] % n) + n) % n;
    if (off == 0) throw Error("offset is a multiple of the cycle length");
    JumpRateMatrix<S> scaled(T.kappa(), 2);
    for (const auto& [key, r] : T.entries()) scaled.set_code(key.first, key.second, r * v);
    std::vector<std::vector<std::size_t>> windows;
    for (int i = 0; i < n; ++i)
      windows.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>((i + off) % n)});
    detail::apply_windows(G, scaled, windows, pending);
  }
  detail::finalize(G, pending);
  return G;
}

/// (mu Q)(x) for every state.
template <class S>
std::vector<S> balance(const FiniteGenerator<S>& G, const std::vector<S>& mu) {
  if (mu.size() != G.num_states) throw Error("measure size does not match the state space");
  std::vector<S> r(G.num_states, S(0));
  for (WordCode x = 0; x < G.num_states; ++x) {
    if (mu[x] == 0) continue;
    r[x] += mu[x] * G.diagonal[x];
    for (const auto& [y, v] : G.rows[x]) r[y] += mu[x] * v;
  }
  return r;
}

/// max_x |(mu Q)(x)|.
template <class S>
S stationarity_residual(const FiniteGenerator<S>& G, const std::vector<S>& mu) {
  S best(0);
  for (const auto& v : balance(G, mu)) best = std::max(best, S(abs_value(v)));
  return best;
}

/// Gibbs measure on Z/nZ: wrapped kernel products normalized (memory m uses wrapped blocks).
template <class S>
std::vector<S> gibbs_measure(const MarkovKernel<S>& M, int n, const OracleLimits& lim = {}) {
  WordCode N = detail::checked_states(M.kappa(), static_cast<std::size_t>(n), lim);
  std::vector<S> mu(N);
  S total(0);
  for (WordCode x = 0; x < N; ++x) {
    mu[x] = cyclic_chain_product(M, decode(x, M.kappa(), n));
    total += mu[x];
  }
  if (total == 0) throw Error("gibbs_measure: zero trace");
  for (auto& v : mu) v /= total;
  return mu;
}

/// Law of the stationary chain on [1,n].
template <class S>
std::vector<S> markov_segment_measure(const StationaryLaw<S>& law, int n, const OracleLimits& lim = {}) {
  if (n < std::max(law.memory(), 1)) throw Error("segment shorter than the kernel memory");
  WordCode N = detail::checked_states(law.kappa(), static_cast<std::size_t>(n), lim);
  std::vector<S> mu(N);
  for (WordCode x = 0; x < N; ++x) mu[x] = law.weight(decode(x, law.kappa(), n));
  return mu;
}

/// Product measure rho over the sites of any space with `sites` cells.
template <class S>
std::vector<S> product_measure(const std::vector<S>& rho, std::size_t sites, const OracleLimits& lim = {}) {
  int k = static_cast<int>(rho.size());
  WordCode N = detail::checked_states(k, sites, lim);
  std::vector<S> mu(N);
  for (WordCode x = 0; x < N; ++x) {
    S p(1);
    for (Letter a : decode(x, k, static_cast<int>(sites))) p *= rho[static_cast<std::size_t>(a)];
    mu[x] = p;
  }
  return mu;
}

struct AbsorbingAnalysis {
  std::vector<WordCode> absorbing;  // union of closed classes, sorted
  std::size_t closed_classes = 0;
  bool is_proper = false;
  bool reaches_all = false;
};

/// Strongly connected components of the positive-rate graph; S = union of sink components.
template <class S>
AbsorbingAnalysis absorbing_analysis(const FiniteGenerator<S>& G) {
  const WordCode N = G.num_states;
  constexpr WordCode none = ~WordCode(0);
  std::vector<WordCode> index(N, none), low(N, 0), comp(N, none);
  std::vector<char> on_stack(N, 0);
  std::vector<WordCode> stack;
  WordCode counter = 0, ncomp = 0;
  // Iterative Tarjan.
  struct Frame {
    WordCode v;
    std::size_t edge;
  };
  for (WordCode root = 0; root < N; ++root) {
    if (index[root] != none) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& edges = G.rows[f.v];
      if (f.edge < edges.size()) {
        WordCode w = edges[f.edge++].first;
        if (!(edges[f.edge - 1].second > 0)) continue;
        if (index[w] == none) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      WordCode v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        WordCode w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
    }
  }
  std::vector<char> is_sink(ncomp, 1);
  for (WordCode x = 0; x < N; ++x)
    for (const auto& [y, v] : G.rows[x])
      if (v > 0 && comp[y] != comp[x]) is_sink[comp[x]] = 0;
  AbsorbingAnalysis out;
  for (WordCode c = 0; c < ncomp; ++c) out.closed_classes += is_sink[c];
  for (WordCode x = 0; x < N; ++x)
    if (is_sink[comp[x]]) out.absorbing.push_back(x);
  out.is_proper = !out.absorbing.empty() && out.absorbing.size() < N;
  // Every state of a finite graph reaches some sink component; checked by reverse search.
  std::vector<std::vector<WordCode>> rev(N);
  for (WordCode x = 0; x < N; ++x)
    for (const auto& [y, v] : G.rows[x])
      if (v > 0) rev[y].push_back(x);
  std::vector<char> seen(N, 0);
  std::vector<WordCode> todo = out.absorbing;
  for (WordCode x : todo) seen[x] = 1;
  while (!todo.empty()) {
    WordCode y = todo.back();
    todo.pop_back();
    for (WordCode x : rev[y])
      if (!seen[x]) {
        seen[x] = 1;
        todo.push_back(x);
      }
  }
  out.reaches_all = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  return out;
}

struct FsConclusion {
  bool excluded = false;
  /// Memories m <= memory_bound are certified (m + L <= n for a proper n).
  int memory_bound = -1;
  /// Every tested n gave a proper absorbing set.
  bool pattern_persists = false;
  std::vector<std::pair<int, bool>> per_n;
  std::string summary;
};

/// Exclusion of full-support Markov laws from proper absorbing sets on the listed cycles.
template <class S>
FsConclusion theorem_fs_conclusion(const JumpRateMatrix<S>& T, const std::vector<int>& n_list, const OracleLimits& lim = {}) {
  if (T.is_zero()) throw Error("theorem_fs_conclusion: T is identically zero");
  if (n_list.empty()) throw Error("theorem_fs_conclusion: empty list of cycle lengths");
  FsConclusion out;
  bool all = true;
  for (int n : n_list) {
    auto a = absorbing_analysis(build_cycle_generator(T, n, lim));
    bool proper = a.is_proper && a.reaches_all;
    out.per_n.emplace_back(n, proper);
    all = all && proper;
    if (proper) out.memory_bound = std::max(out.memory_bound, n - T.range());
  }
  out.excluded = all;
  out.pattern_persists = all;
  if (all)
    out.summary = "no full-support Markov law (m <= " + std::to_string(out.memory_bound) +
                  " certified; pattern persists)";
  else
    out.summary = "inconclusive: some cycle length has no proper absorbing set";
  return out;
}

}  // namespace ipsinv
