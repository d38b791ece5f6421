#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ipsinv/scalar.hpp"

namespace ipsinv {

using Letter = int;
/// Words are 0-based letter sequences; position 0 is the paper's site 1.
using Word = std::vector<Letter>;
/// Base-kappa encoding of a word, first letter most significant.
using WordCode = std::uint64_t;

struct Alphabet {
  int kappa = 2;

  explicit Alphabet(int k) : kappa(k) {
    if (k < 2) throw Error("alphabet size must be >= 2, got " + std::to_string(k));
  }
  bool contains(Letter a) const { return a >= 0 && a < kappa; }
};

inline WordCode ipow(int base, int exp) {
  WordCode r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (WordCode(1) << 62) / static_cast<WordCode>(base))
      throw ResourceCapExceeded("word space too large");
    r *= static_cast<WordCode>(base);
  }
  return r;
}

inline WordCode encode(const Word& w, int kappa) {
  WordCode c = 0;
  for (Letter a : w) {
    if (a < 0 || a >= kappa) throw Error("letter " + std::to_string(a) + " outside alphabet");
    c = c * static_cast<WordCode>(kappa) + static_cast<WordCode>(a);
  }
  return c;
}

inline Word decode(WordCode code, int kappa, int length) {
  Word w(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<Letter>(code % static_cast<WordCode>(kappa));
    code /= static_cast<WordCode>(kappa);
  }
  return w;
}

inline std::string word_to_string(const Word& w) {
  bool compact = std::all_of(w.begin(), w.end(), [](Letter a) { return a >= 0 && a < 10; });
  std::string s;
  if (compact) {
    for (Letter a : w) s += static_cast<char>('0' + a);
    return s;
  }
  s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(w[i]);
  }
  return s + ")";
}

inline Word concat(const Word& a, const Word& b) {
  Word r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline Word subword(const Word& w, std::size_t start, std::size_t len) {
  return Word(w.begin() + static_cast<std::ptrdiff_t>(start),
              w.begin() + static_cast<std::ptrdiff_t>(start + len));
}

/// Cyclic subword w[start .. start+len-1] with indices taken modulo |w|.
inline Word cyclic_subword(const Word& w, std::size_t start, std::size_t len) {
  Word r(len);
  for (std::size_t i = 0; i < len; ++i) r[i] = w[(start + i) % w.size()];
  return r;
}

inline Word rotate_word(const Word& w, std::size_t k) { return cyclic_subword(w, k % w.size(), w.size()); }

/// Sparse jump rate matrix T[w -> w'] over words of length `range`.
template <class S>
class JumpRateMatrix {
 public:
  using Entry = std::pair<WordCode, S>;

  JumpRateMatrix(int kappa, int range) : alphabet_(kappa), range_(range) {
    if (range < 1) throw Error("range must be >= 1");
    num_words_ = ipow(kappa, range);
    exit_.assign(num_words_, S(0));
    incoming_.resize(num_words_);
    outgoing_.resize(num_words_);
  }

  int kappa() const { return alphabet_.kappa; }
  int range() const { return range_; }
  WordCode num_words() const { return num_words_; }

  void set(const Word& from, const Word& to, const S& rate) {
    if (static_cast<int>(from.size()) != range_ || static_cast<int>(to.size()) != range_)
      throw Error("rate words must have length " + std::to_string(range_));
    set_code(encode(from, kappa()), encode(to, kappa()), rate);
  }

  void set_code(WordCode from, WordCode to, const S& rate) {
    if (from >= num_words_ || to >= num_words_) throw Error("word code out of range");
    if (rate < 0) throw Error("negative rate");
    if (from == to) {
      if (rate != 0)
        throw Error("diagonal rate for word " + word_to_string(decode(from, kappa(), range_)));
      return;
    }
    auto key = std::make_pair(from, to);
    S old(0);
    if (auto it = rates_.find(key); it != rates_.end()) old = it->second;
    if (rate == 0)
      rates_.erase(key);
    else
      rates_[key] = rate;
    exit_[from] += rate - old;
    update_list(incoming_[to], from, rate);
    update_list(outgoing_[from], to, rate);
  }

  void add(const Word& from, const Word& to, const S& rate) {
    set(from, to, this->rate(from, to) + rate);
  }

  S rate_code(WordCode from, WordCode to) const {
    auto it = rates_.find({from, to});
    return it == rates_.end() ? S(0) : it->second;
  }
  S rate(const Word& from, const Word& to) const {
    return rate_code(encode(from, kappa()), encode(to, kappa()));
  }

  /// T_out(w) = sum over w' of T[w -> w'].
  const S& exit_rate(WordCode from) const { return exit_[from]; }
  const std::vector<Entry>& incoming(WordCode to) const { return incoming_[to]; }
  const std::vector<Entry>& outgoing(WordCode from) const { return outgoing_[from]; }
  const std::map<std::pair<WordCode, WordCode>, S>& entries() const { return rates_; }

  bool is_zero() const { return rates_.empty(); }
  S max_rate() const {
    S m(0);
    for (const auto& [k, v] : rates_) m = std::max(m, v);
    return m;
  }

  template <class S2>
  JumpRateMatrix<S2> convert() const {
    JumpRateMatrix<S2> r(kappa(), range_);
    for (const auto& [k, v] : rates_) r.set_code(k.first, k.second, scalar_cast<S2>(v));
    return r;
  }

  bool operator==(const JumpRateMatrix& o) const {
    return kappa() == o.kappa() && range_ == o.range_ && rates_ == o.rates_;
  }

 private:
  static void update_list(std::vector<Entry>& list, WordCode key, const S& rate) {
    auto it = std::find_if(list.begin(), list.end(), [&](const Entry& e) { return e.first == key; });
    if (rate == 0) {
      if (it != list.end()) list.erase(it);
    } else if (it != list.end()) {
      it->second = rate;
    } else {
      list.insert(std::upper_bound(list.begin(), list.end(), key,
                                   [](WordCode k, const Entry& e) { return k < e.first; }),
                  Entry{key, rate});
    }
  }

  Alphabet alphabet_;
  int range_;
  WordCode num_words_ = 0;
  std::map<std::pair<WordCode, WordCode>, S> rates_;
  std::vector<S> exit_;
  std::vector<std::vector<Entry>> incoming_;
  std::vector<std::vector<Entry>> outgoing_;
};

/// Memory-m transition kernel; rows indexed by the base-kappa code of the context.
/// Memory 0 is a product measure whose single row is the marginal.
template <class S>
class MarkovKernel {
 public:
  MarkovKernel(int kappa, int memory, std::vector<std::vector<S>> rows, const Tolerance& tol = {})
      : alphabet_(kappa), memory_(memory) {
    if (memory < 0) throw Error("memory must be >= 0");
    WordCode contexts = ipow(kappa, memory);
    if (rows.size() != contexts)
      throw Error("kernel needs " + std::to_string(contexts) + " rows, got " +
                  std::to_string(rows.size()));
    entries_.reserve(contexts * static_cast<WordCode>(kappa));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].size()) != kappa) throw Error("kernel row has wrong length");
      S sum(0);
      for (const S& v : rows[r]) {
        if (v < 0) throw Error("negative kernel entry");
        sum += v;
        entries_.push_back(v);
      }
      if (!approx_equal<S>(sum, S(1), tol))
        throw Error("kernel row " + std::to_string(r) + " does not sum to 1");
    }
  }

  static MarkovKernel product(const std::vector<S>& rho, const Tolerance& tol = {}) {
    return MarkovKernel(static_cast<int>(rho.size()), 0, {rho}, tol);
  }

  int kappa() const { return alphabet_.kappa; }
  int memory() const { return memory_; }
  WordCode num_contexts() const { return entries_.size() / static_cast<std::size_t>(kappa()); }

  const S& operator()(WordCode context, Letter next) const {
    return entries_[context * static_cast<WordCode>(kappa()) + static_cast<WordCode>(next)];
  }
  /// Entry for the window w[start .. start+m] (context then next letter).
  const S& window(const Word& w, std::size_t start) const {
    WordCode c = 0;
    for (int i = 0; i < memory_; ++i)
      c = c * static_cast<WordCode>(kappa()) + static_cast<WordCode>(w[start + static_cast<std::size_t>(i)]);
    return (*this)(c, w[start + static_cast<std::size_t>(memory_)]);
  }

  /// Product of kernel entries over all length-(m+1) windows of w.
  S chain_product(const Word& w) const {
    S p(1);
    if (static_cast<int>(w.size()) <= memory_) return p;
    for (std::size_t j = 0; j + static_cast<std::size_t>(memory_) < w.size(); ++j) p *= window(w, j);
    return p;
  }

  bool positive() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const S& v) { return v > 0; });
  }

  std::vector<S> row(WordCode context) const {
    auto b = entries_.begin() + static_cast<std::ptrdiff_t>(context * static_cast<WordCode>(kappa()));
    return std::vector<S>(b, b + kappa());
  }
  std::vector<std::vector<S>> rows() const {
    std::vector<std::vector<S>> r;
    for (WordCode c = 0; c < num_contexts(); ++c) r.push_back(row(c));
    return r;
  }

  template <class S2>
  MarkovKernel<S2> convert(const Tolerance& tol = {}) const {
    std::vector<std::vector<S2>> r;
    for (const auto& row_v : rows()) {
      std::vector<S2> x;
      for (const auto& v : row_v) x.push_back(scalar_cast<S2>(v));
      r.push_back(std::move(x));
    }
    return MarkovKernel<S2>(kappa(), memory_, std::move(r), tol);
  }

 private:
  Alphabet alphabet_;
  int memory_;
  std::vector<S> entries_;
};

/// A kernel together with its stationary block law rho (blocks of length max(m,1)).
template <class S>
class StationaryLaw {
 public:
  StationaryLaw(MarkovKernel<S> kernel, std::vector<S> rho, const Tolerance& tol = {})
      : kernel_(std::move(kernel)), rho_(std::move(rho)) {
    int m = kernel_.memory();
    WordCode blocks = ipow(kernel_.kappa(), std::max(m, 1));
    if (rho_.size() != blocks) throw Error("stationary law has wrong size");
    S sum(0);
    for (const S& v : rho_) {
      if (v < 0) throw Error("negative probability");
      sum += v;
    }
    if (!approx_equal<S>(sum, S(1), tol)) throw Error("stationary law does not sum to 1");
    if (m == 0) {
      for (int a = 0; a < kernel_.kappa(); ++a)
        if (!approx_equal<S>(rho_[static_cast<std::size_t>(a)], kernel_(0, a), tol))
          throw Error("product law marginal differs from the kernel row");
    } else {
      int k = kernel_.kappa();
      WordCode shift = ipow(k, m - 1);
      for (WordCode b = 0; b < blocks; ++b) {
        // (rho M)(b) = sum over the letter dropped on the left.
        S acc(0);
        WordCode tail = b / static_cast<WordCode>(k);
        for (int a = 0; a < k; ++a)
          acc += rho_[static_cast<WordCode>(a) * shift + tail] * kernel_(static_cast<WordCode>(a) * shift + tail, static_cast<Letter>(b % static_cast<WordCode>(k)));
        if (!approx_equal<S>(acc, rho_[b], tol)) throw Error("rho is not stationary for the kernel");
      }
    }
  }

  /// Product law from a marginal.
  static StationaryLaw product(const std::vector<S>& rho, const Tolerance& tol = {}) {
    return StationaryLaw(MarkovKernel<S>::product(rho, tol), rho, tol);
  }

  const MarkovKernel<S>& kernel() const { return kernel_; }
  const std::vector<S>& rho() const { return rho_; }
  int memory() const { return kernel_.memory(); }
  int kappa() const { return kernel_.kappa(); }

  /// Probability of the first m letters of w (1 when m = 0).
  S block(const Word& w, std::size_t start = 0) const {
    int m = kernel_.memory();
    if (m == 0) return S(1);
    WordCode c = 0;
    for (int i = 0; i < m; ++i)
      c = c * static_cast<WordCode>(kappa()) + static_cast<WordCode>(w[start + static_cast<std::size_t>(i)]);
    return rho_[c];
  }

  /// Law of the chain on an interval: block(w[0..m-1]) times the chain product; needs |w| >= m.
  S weight(const Word& w) const { return block(w) * kernel_.chain_product(w); }

  /// One-site marginal.
  S marginal(Letter a) const {
    if (kernel_.memory() <= 1) return rho_[static_cast<std::size_t>(a)];
    S acc(0);
    WordCode tail = ipow(kappa(), kernel_.memory() - 1);
    for (WordCode t = 0; t < tail; ++t) acc += rho_[static_cast<WordCode>(a) * tail + t];
    return acc;
  }

  template <class S2>
  StationaryLaw<S2> convert(const Tolerance& tol = {}) const {
    std::vector<S2> r;
    for (const auto& v : rho_) r.push_back(scalar_cast<S2>(v));
    return StationaryLaw<S2>(kernel_.template convert<S2>(tol), std::move(r), tol);
  }

 private:
  MarkovKernel<S> kernel_;
  std::vector<S> rho_;
};

/// Boundary jump rate matrices beta^l (acting on the first L-1 sites) and beta^r (last L-1 sites).
template <class S>
struct BoundaryRates {
  JumpRateMatrix<S> left;
  JumpRateMatrix<S> right;

  BoundaryRates(int kappa, int range_minus_one)
      : left(kappa, range_minus_one), right(kappa, range_minus_one) {}
  BoundaryRates(JumpRateMatrix<S> l, JumpRateMatrix<S> r) : left(std::move(l)), right(std::move(r)) {
    if (left.range() != right.range() || left.kappa() != right.kappa())
      throw Error("boundary matrices must share alphabet and range");
  }
};

/// Product of kernel entries over the n wrapped length-(m+1) windows of a cyclic word
/// (unnormalized Gibbs weight on Z/nZ).
template <class S>
S cyclic_chain_product(const MarkovKernel<S>& M, const Word& x) {
  std::size_t m = static_cast<std::size_t>(M.memory());
  S p(1);
  for (std::size_t j = 0; j < x.size(); ++j) p *= M.window(cyclic_subword(x, j, m + 1), 0);
  return p;
}

/// Sum over windows fully inside the word of T[w(window) -> z(window)], with w = z elsewhere.
template <class S>
S induced_rate(const JumpRateMatrix<S>& T, const Word& w, const Word& z) {
  if (w.size() != z.size()) throw Error("induced_rate: length mismatch");
  std::size_t n = w.size(), L = static_cast<std::size_t>(T.range());
  S total(0);
  if (n < L) return total;
  for (std::size_t a = 0; a + L <= n; ++a) {
    bool agree = true;
    for (std::size_t i = 0; i < n && agree; ++i)
      if ((i < a || i >= a + L) && w[i] != z[i]) agree = false;
    if (!agree) continue;
    total += T.rate(subword(w, a, L), subword(z, a, L));
  }
  return total;
}

/// Cyclic version: windows wrap modulo n, and all n wrapped windows count even when n < L.
template <class S>
S induced_rate_cyclic(const JumpRateMatrix<S>& T, const Word& w, const Word& z) {
  if (w.size() != z.size()) throw Error("induced_rate_cyclic: length mismatch");
  std::size_t n = w.size(), L = static_cast<std::size_t>(T.range());
  if (n == 0) throw Error("induced_rate_cyclic: empty word");
  S total(0);
  std::vector<char> covered(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t i = 0; i < L; ++i) covered[(a + i) % n] = 1;
    bool agree = true;
    for (std::size_t i = 0; i < n && agree; ++i)
      if (!covered[i] && w[i] != z[i]) agree = false;
    if (!agree) continue;
    total += T.rate(cyclic_subword(w, a, L), cyclic_subword(z, a, L));
  }
  return total;
}

}  // namespace ipsinv
