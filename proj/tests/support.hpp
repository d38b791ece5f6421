#pragma once

#include <random>
#include <vector>

#include "ipsinv/ipsinv.hpp"

namespace testing_support {

using ipsinv::Rational;
using ipsinv::Word;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240917);
  return g;
}

inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

/// p/q with 1 <= p <= max_num, 1 <= q <= max_den.
inline Rational positive_rational(int max_num = 9, int max_den = 9) {
  return Rational(uniform_int(1, max_num), uniform_int(1, max_den));
}

inline std::vector<Rational> random_distribution(int kappa) {
  std::vector<Rational> v;
  Rational sum = 0;
  for (int a = 0; a < kappa; ++a) {
    v.push_back(positive_rational());
    sum += v.back();
  }
  for (auto& x : v) x /= sum;
  return v;
}

inline ipsinv::MarkovKernel<Rational> random_kernel(int kappa, int memory = 1) {
  std::vector<std::vector<Rational>> rows;
  for (ipsinv::WordCode c = 0; c < ipsinv::ipow(kappa, memory); ++c) rows.push_back(random_distribution(kappa));
  return ipsinv::MarkovKernel<Rational>(kappa, memory, rows);
}

inline ipsinv::StationaryLaw<Rational> random_law(int kappa, int memory = 1) {
  return ipsinv::stationary_distribution(random_kernel(kappa, memory));
}

/// Sparse rate matrix with at most `max_entries` positive entries.
inline ipsinv::JumpRateMatrix<Rational> random_jrm(int kappa, int range, int max_entries) {
  ipsinv::JumpRateMatrix<Rational> T(kappa, range);
  int n = uniform_int(1, max_entries);
  auto words = static_cast<int>(ipsinv::ipow(kappa, range));
  for (int i = 0; i < n; ++i) {
    int a = uniform_int(0, words - 1), b = uniform_int(0, words - 1);
    if (a != b) T.set_code(static_cast<ipsinv::WordCode>(a), static_cast<ipsinv::WordCode>(b), positive_rational(4, 3));
  }
  return T;
}

/// Rate matrix built to make M line-invariant: for each word pair, the reverse rate is set so that the
/// pair is locally reversible under M (this makes Z == 0 for memory 1 only when all contexts agree,
/// so it is used with product laws).
inline ipsinv::JumpRateMatrix<Rational> reversible_jrm(const std::vector<Rational>& rho, int range, int pairs) {
  const int k = static_cast<int>(rho.size());
  ipsinv::JumpRateMatrix<Rational> T(k, range);
  auto words = static_cast<int>(ipsinv::ipow(k, range));
  auto weight = [&](ipsinv::WordCode c) {
    Rational p = 1;
    for (auto a : ipsinv::decode(c, k, range)) p *= rho[static_cast<std::size_t>(a)];
    return p;
  };
  for (int i = 0; i < pairs; ++i) {
    auto a = static_cast<ipsinv::WordCode>(uniform_int(0, words - 1));
    auto b = static_cast<ipsinv::WordCode>(uniform_int(0, words - 1));
    if (a == b) continue;
    Rational r = positive_rational(4, 3);
    T.set_code(a, b, r);
    T.set_code(b, a, r * weight(a) / weight(b));
  }
  return T;
}

}  // namespace testing_support
