#include <gtest/gtest.h>

#include "support.hpp"

using namespace ipsinv;
using testing_support::uniform_int;

TEST(Words, EncodeDecodeRoundTrip) {
  for (int trial = 0; trial < 200; ++trial) {
    int k = uniform_int(2, 5), len = uniform_int(0, 7);
    Word w;
    for (int i = 0; i < len; ++i) w.push_back(uniform_int(0, k - 1));
    EXPECT_EQ(decode(encode(w, k), k, len), w);
  }
}

TEST(Words, FirstLetterIsMostSignificant) {
  EXPECT_EQ(encode({1, 0}, 2), 2u);
  EXPECT_EQ(encode({0, 1}, 2), 1u);
  EXPECT_EQ(encode({2, 1, 0}, 3), 21u);
}

TEST(Words, CyclicHelpers) {
  Word w{0, 1, 2, 3};
  EXPECT_EQ(cyclic_subword(w, 3, 3), (Word{3, 0, 1}));
  EXPECT_EQ(rotate_word(w, 1), (Word{1, 2, 3, 0}));
  EXPECT_EQ(word_to_string({1, 0, 1}), "101");
}

TEST(JumpRateMatrix, ExitRatesTrackUpdates) {
  JumpRateMatrix<Rational> T(2, 2);
  T.set({1, 0}, {0, 1}, Rational(3, 2));
  T.set({1, 0}, {0, 0}, 1);
  EXPECT_EQ(T.exit_rate(encode({1, 0}, 2)), Rational(5, 2));
  T.set({1, 0}, {0, 1}, 0);
  EXPECT_EQ(T.exit_rate(encode({1, 0}, 2)), Rational(1));
  EXPECT_EQ(T.entries().size(), 1u);
  T.add({1, 0}, {0, 0}, Rational(1, 2));
  EXPECT_EQ(T.rate({1, 0}, {0, 0}), Rational(3, 2));
}

TEST(JumpRateMatrix, RejectsInvalidEntries) {
  JumpRateMatrix<Rational> T(2, 2);
  EXPECT_THROW(T.set({1, 0}, {1, 0}, 1), Error);
  EXPECT_THROW(T.set({1, 0}, {0, 1}, -1), Error);
  EXPECT_THROW(T.set({1, 0, 0}, {0, 1, 0}, 1), Error);
  EXPECT_NO_THROW(T.set({1, 0}, {1, 0}, 0));
  EXPECT_THROW(JumpRateMatrix<Rational>(2, 0), Error);
}

TEST(JumpRateMatrix, IncomingAndOutgoingAreSortedAndConsistent) {
  for (int trial = 0; trial < 50; ++trial) {
    auto T = testing_support::random_jrm(3, 2, 12);
    for (WordCode w = 0; w < T.num_words(); ++w) {
      Rational out = 0;
      for (std::size_t i = 0; i < T.outgoing(w).size(); ++i) {
        out += T.outgoing(w)[i].second;
        if (i) {
          EXPECT_LT(T.outgoing(w)[i - 1].first, T.outgoing(w)[i].first);
        }
        EXPECT_EQ(T.rate_code(w, T.outgoing(w)[i].first), T.outgoing(w)[i].second);
      }
      EXPECT_EQ(out, T.exit_rate(w));
      for (const auto& [u, r] : T.incoming(w)) EXPECT_EQ(T.rate_code(u, w), r);
    }
  }
}

TEST(JumpRateMatrix, FloatConversionKeepsEntries) {
  auto T = testing_support::random_jrm(2, 3, 6);
  auto D = T.convert<double>();
  for (const auto& [k, v] : T.entries()) EXPECT_DOUBLE_EQ(D.rate_code(k.first, k.second), to_double(v));
}

TEST(MarkovKernel, Validation) {
  EXPECT_THROW(MarkovKernel<Rational>(2, 1, {{Rational(1, 2), Rational(1, 2)}}), Error);
  EXPECT_THROW(MarkovKernel<Rational>(2, 1, {{Rational(1, 2), Rational(1, 3)}, {Rational(1, 2), Rational(1, 2)}}), Error);
  EXPECT_THROW(MarkovKernel<Rational>(2, 0, {{Rational(3, 2), Rational(-1, 2)}}), Error);
  MarkovKernel<double> F(2, 1, {{0.5 + 1e-12, 0.5}, {0.25, 0.75}});
  EXPECT_TRUE(F.positive());
}

TEST(MarkovKernel, ChainProductAndWeight) {
  MarkovKernel<Rational> M(2, 1, {{Rational(4, 5), Rational(1, 5)}, {Rational(1, 5), Rational(4, 5)}});
  EXPECT_EQ(M.chain_product({0, 0, 1, 1}), Rational(4, 5) * Rational(1, 5) * Rational(4, 5));
  StationaryLaw<Rational> law(M, {Rational(1, 2), Rational(1, 2)});
  EXPECT_EQ(law.weight({0, 1}), Rational(1, 10));
  EXPECT_EQ(law.marginal(1), Rational(1, 2));
  EXPECT_EQ(cyclic_chain_product(M, {0, 1}), Rational(1, 25));
}

TEST(StationaryLaw, RejectsNonStationaryRho) {
  MarkovKernel<Rational> M(2, 1, {{Rational(1, 2), Rational(1, 2)}, {Rational(1, 4), Rational(3, 4)}});
  EXPECT_THROW(StationaryLaw<Rational>(M, {Rational(1, 2), Rational(1, 2)}), Error);
  EXPECT_NO_THROW(StationaryLaw<Rational>(M, {Rational(1, 3), Rational(2, 3)}));
}

TEST(StationaryLaw, MarginalsSumToOneForMemoryTwo) {
  for (int trial = 0; trial < 10; ++trial) {
    auto law = testing_support::random_law(2, 2);
    Rational s = 0;
    for (int a = 0; a < 2; ++a) s += law.marginal(a);
    EXPECT_EQ(s, Rational(1));
    // Kolmogorov consistency of word weights.
    for (WordCode c = 0; c < 8; ++c) {
      Word w = decode(c, 2, 3);
      EXPECT_EQ(law.weight(concat(w, {0})) + law.weight(concat(w, {1})), law.weight(w));
      EXPECT_EQ(law.weight(concat({0}, w)) + law.weight(concat({1}, w)), law.weight(w));
    }
  }
}

TEST(InducedRate, LineAndCycleWindows) {
  JumpRateMatrix<Rational> T(2, 2);
  T.set({1, 0}, {0, 1}, 1);
  EXPECT_EQ(induced_rate(T, {1, 0, 0}, {0, 1, 0}), Rational(1));
  EXPECT_EQ(induced_rate(T, {0, 0, 1}, {1, 0, 0}), Rational(0));
  EXPECT_EQ(induced_rate_cyclic(T, {0, 0, 1}, {1, 0, 0}), Rational(1));
  // n = 2 < L + 1: both wrapped windows act on the same pair of sites.
  EXPECT_EQ(induced_rate_cyclic(T, {1, 0}, {0, 1}), Rational(1));
  T.set({0, 1}, {1, 0}, 2);
  EXPECT_EQ(induced_rate_cyclic(T, {1, 0}, {0, 1}), Rational(3));
  EXPECT_EQ(induced_rate_cyclic(T, {0, 1}, {1, 0}), Rational(3));
}

TEST(Scalar, ParseRational) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-0.125"), Rational(-1, 8));
  EXPECT_EQ(parse_rational(" 7 "), Rational(7));
  EXPECT_EQ(parse_rational(".5"), Rational(1, 2));
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("abc"), Error);
  EXPECT_THROW(parse_rational(""), Error);
}

TEST(Scalar, ExactRoots) {
  EXPECT_EQ(*exact_sqrt(Rational(9, 4)), Rational(3, 2));
  EXPECT_FALSE(exact_sqrt(Rational(2)).has_value());
  EXPECT_EQ(*exact_cube_root(Rational(8, 27)), Rational(2, 3));
  EXPECT_FALSE(exact_cube_root(Rational(-8)).has_value());
}

TEST(Scalar, BestRationalApproximation) {
  EXPECT_EQ(best_rational_approximation(1.0 / 3.0, 1000000), Rational(1, 3));
  EXPECT_EQ(best_rational_approximation(-0.75, 100), Rational(-3, 4));
  EXPECT_EQ(best_rational_approximation(3.14159265358979, 1000), Rational(355, 113));
}
