#include <gtest/gtest.h>

#include "support.hpp"

using namespace ipsinv;
using testing_support::uniform_int;

TEST(Generator, RowsSumToZero) {
  for (int trial = 0; trial < 20; ++trial) {
    int k = uniform_int(2, 3), L = uniform_int(1, 3);
    auto T = testing_support::random_jrm(k, L, 6);
    for (int n = 1; n <= 5; ++n) {
      auto G = build_cycle_generator(T, n);
      for (WordCode x = 0; x < G.num_states; ++x) {
        Rational s = G.diagonal[x];
        for (const auto& [y, v] : G.rows[x]) {
          EXPECT_NE(y, x);
          EXPECT_GT(v, 0);
          s += v;
        }
        EXPECT_EQ(s, Rational(0));
      }
    }
  }
}

TEST(Generator, CycleRatesFromWindows) {
  auto T = models::tasep().T.value();
  auto G = build_cycle_generator(T, 4);
  EXPECT_EQ(G.rate(encode({1, 0, 1, 0}, 2), encode({0, 1, 1, 0}, 2)), Rational(1));
  EXPECT_EQ(G.rate(encode({1, 0, 1, 0}, 2), encode({0, 0, 1, 1}, 2)), Rational(0));
  EXPECT_EQ(G.rate(encode({0, 0, 0, 1}, 2), encode({1, 0, 0, 0}, 2)), Rational(1));
  EXPECT_EQ(G.diagonal[encode({1, 0, 1, 0}, 2)], Rational(-2));
}

TEST(Generator, SegmentWithoutBoundaryHasNoWrap) {
  auto T = models::tasep().T.value();
  auto G = build_segment_generator<Rational>(T, nullptr, 3);
  EXPECT_EQ(G.rate(encode({0, 0, 1}, 2), encode({1, 0, 0}, 2)), Rational(0));
  EXPECT_EQ(G.rate(encode({1, 0, 0}, 2), encode({0, 1, 0}, 2)), Rational(1));
}

TEST(Generator, TorusSquaresWrap) {
  SquareJRM<Rational> T2(2);
  T2.set({1, 0, 0, 0}, {0, 0, 0, 1}, 1);
  auto G = build_torus_generator(T2.T, 2);
  // On the 2 x 2 torus every site is the top-left corner of exactly one square.
  EXPECT_EQ(G.diagonal[encode({1, 0, 0, 0}, 2)], Rational(-1));
  EXPECT_EQ(G.rate(encode({1, 0, 0, 0}, 2), encode({0, 0, 0, 1}, 2)), Rational(1));
}

TEST(Measures, IsingGibbsIsStationary) {
  auto spec = models::stochastic_ising(Rational(1, 2));
  for (int n = 3; n <= 8; ++n) {
    auto G = build_cycle_generator(*spec.T, n);
    auto mu = gibbs_measure(*spec.kernel, n);
    Rational total = 0;
    for (const auto& v : mu) total += v;
    EXPECT_EQ(total, Rational(1));
    EXPECT_EQ(stationarity_residual(G, mu), Rational(0));
  }
}

TEST(Measures, NonInvariantProductHasResidual) {
  auto spec = models::tasep3(1, 1, 1);
  auto G = build_cycle_generator(*spec.T, 3);
  EXPECT_GT(stationarity_residual(G, product_measure(*spec.rho, 3)), 0);
}

TEST(Measures, SegmentMeasureIsNormalized) {
  auto law = testing_support::random_law(3);
  auto mu = markov_segment_measure(law, 4);
  Rational total = 0;
  for (const auto& v : mu) total += v;
  EXPECT_EQ(total, Rational(1));
}

TEST(Limits, CapIsEnforced) {
  auto T = models::tasep().T.value();
  EXPECT_THROW(build_cycle_generator(T, 21), ResourceCapExceeded);
  EXPECT_THROW(build_cycle_generator(T, 10, OracleLimits{512}), ResourceCapExceeded);
  EXPECT_NO_THROW(build_cycle_generator(T, 9, OracleLimits{512}));
}

TEST(Absorbing, VoterHasTwoAbsorbingStates) {
  auto T = models::voter().T.value();
  for (int n = 3; n <= 8; ++n) {
    auto a = absorbing_analysis(build_cycle_generator(T, n));
    EXPECT_TRUE(a.is_proper);
    EXPECT_TRUE(a.reaches_all);
    EXPECT_EQ(a.absorbing, (std::vector<WordCode>{0, ipow(2, n) - 1}));
  }
}

TEST(Absorbing, ContactContainsAllZero) {
  for (int range : {2, 3}) {
    auto T = models::contact(Rational(2), range).T.value();
    for (int n = 3; n <= 8; ++n) {
      auto a = absorbing_analysis(build_cycle_generator(T, n));
      EXPECT_TRUE(a.is_proper);
      ASSERT_FALSE(a.absorbing.empty());
      EXPECT_EQ(a.absorbing.front(), 0u);
    }
  }
}

TEST(Absorbing, TasepHasNoProperAbsorbingSet) {
  // Every cycle configuration class with a fixed particle count is closed.
  auto a = absorbing_analysis(build_cycle_generator(models::tasep().T.value(), 5));
  EXPECT_FALSE(a.is_proper && a.reaches_all);
  EXPECT_EQ(a.closed_classes, 6u);
}

TEST(FsConclusion, VoterAndContact) {
  std::vector<int> ns{3, 4, 5, 6, 7, 8};
  auto v = theorem_fs_conclusion(models::voter().T.value(), ns);
  EXPECT_TRUE(v.excluded);
  EXPECT_EQ(v.memory_bound, 5);
  EXPECT_EQ(v.summary, "no full-support Markov law (m <= 5 certified; pattern persists)");
  auto c = theorem_fs_conclusion(models::contact(Rational(1)).T.value(), ns);
  EXPECT_TRUE(c.excluded);
  EXPECT_EQ(c.memory_bound, 6);
  auto t = theorem_fs_conclusion(models::tasep().T.value(), ns);
  EXPECT_FALSE(t.excluded);
  EXPECT_THROW(theorem_fs_conclusion(JumpRateMatrix<Rational>(2, 2), ns), Error);
}
