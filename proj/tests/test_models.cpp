#include <gtest/gtest.h>

#include "support.hpp"

using namespace ipsinv;
using testing_support::positive_rational;
using testing_support::uniform_int;

TEST(Catalog, EveryNameBuilds) {
  for (const auto& name : model_names()) {
    auto spec = build_model(name, {});
    EXPECT_EQ(spec.name.substr(0, 5), name.substr(0, 5));
    EXPECT_TRUE(spec.T.has_value() || spec.square.has_value()) << name;
    EXPECT_FALSE(spec.expected.empty()) << name;
  }
  EXPECT_THROW(build_model("nope", {}), Error);
  EXPECT_THROW(build_model("contact", {{"mu", "1"}}), Error);
  EXPECT_THROW(build_model("contact", {{"lambda", "-1"}}), Error);
  EXPECT_THROW(build_model("zero_range", {{"kappa", "5/2"}}), Error);
}

TEST(Tasep, Rates) {
  auto T = models::tasep().T.value();
  EXPECT_EQ(T.entries().size(), 1u);
  EXPECT_EQ(T.rate({1, 0}, {0, 1}), Rational(1));
}

TEST(Contact, BothEncodingsGiveTheSameCycleGenerator) {
  Rational lambda(3, 2);
  auto T2 = models::contact(lambda, 2).T.value();
  auto T3 = models::contact(lambda, 3).T.value();
  for (int n = 3; n <= 6; ++n) {
    auto G2 = build_cycle_generator(T2, n), G3 = build_cycle_generator(T3, n);
    EXPECT_EQ(G2.rows, G3.rows) << n;
  }
}

TEST(Voter, IntegerRates) {
  auto T = models::voter().T.value();
  EXPECT_EQ(T.rate({0, 1, 0}, {0, 0, 0}), Rational(2));
  EXPECT_EQ(T.rate({0, 1, 1}, {0, 0, 1}), Rational(1));
  EXPECT_EQ(T.rate({1, 0, 1}, {1, 1, 1}), Rational(2));
  EXPECT_EQ(T.rate({1, 1, 1}, {1, 0, 1}), Rational(0));
}

TEST(StochasticIsing, RatesAndKernelAtHalf) {
  auto spec = models::stochastic_ising(Rational(1, 2));
  std::set<Rational> rates;
  for (const auto& [k, v] : spec.T->entries()) rates.insert(v);
  EXPECT_EQ(rates, (std::set<Rational>{Rational(1, 4), Rational(1), Rational(4)}));
  EXPECT_EQ(spec.T->rate({0, 0, 0}, {0, 1, 0}), Rational(1, 4));
  EXPECT_EQ(spec.T->rate({1, 0, 1}, {1, 1, 1}), Rational(4));
  EXPECT_EQ(spec.kernel->rows(), (std::vector<std::vector<Rational>>{{Rational(4, 5), Rational(1, 5)}, {Rational(1, 5), Rational(4, 5)}}));
}

TEST(StochasticIsing, LineInvariantForEveryTemperature) {
  for (Rational x : {Rational(1, 3), Rational(2, 3), Rational(1), Rational(5, 2)}) {
    auto spec = models::stochastic_ising(x);
    CriterionContext<Rational> ctx(*spec.T, StationaryLaw<Rational>(*spec.kernel, *spec.rho));
    EXPECT_TRUE(z_table(ctx).identically_zero());
  }
}

TEST(Hmc, ProjectionAndRatios) {
  auto spec = models::hmc_example();
  StationaryLaw<Rational> law(*spec.kernel, *spec.rho);
  EXPECT_TRUE(z_table(CriterionContext<Rational>(*spec.T, law)).identically_zero());
  auto p = project_jrm(*spec.T, *spec.projection);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p.T->rate({0, 0, 0}, {0, 1, 0}), Rational(270));
  EXPECT_EQ(p.T->rate({0, 1, 0}, {0, 0, 0}), Rational(294));
  EXPECT_EQ(p.T->entries().size(), 2u);
  auto mu = [&](const Word& w) { return projected_probability(law, *spec.projection, w); };
  EXPECT_EQ(mu({1, 1, 1}) / mu({1, 1}), Rational(71, 106));
  EXPECT_EQ(mu({1, 1}) / mu({1}), Rational(53, 81));
  EXPECT_EQ(mu({0}) + mu({1}), Rational(1));
}

TEST(Projection, IdentityKeepsRates) {
  for (int trial = 0; trial < 10; ++trial) {
    auto T = testing_support::random_jrm(3, 2, 6);
    auto p = project_jrm(T, {0, 1, 2});
    ASSERT_TRUE(p.ok());
    EXPECT_EQ(*p.T, T);
  }
}

TEST(Projection, RepresentativeDependenceIsReported) {
  auto T = models::hmc_example().T.value();
  T.set({0, 2, 0}, {0, 0, 0}, 293);
  auto p = project_jrm(T, {0, 1, 1});
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.violation->representative_a, (Word{0, 1, 0}));
  EXPECT_EQ(p.violation->representative_b, (Word{0, 2, 0}));
  EXPECT_EQ(p.violation->target, (Word{0, 0, 0}));
  EXPECT_EQ(p.violation->rate_a, Rational(294));
  EXPECT_EQ(p.violation->rate_b, Rational(293));
  EXPECT_THROW(project_jrm(T, {0, 0, 0, 1}), Error);
  EXPECT_THROW(project_jrm(T, {0, 2, 2}), Error);
}

TEST(AlmostGeometric, GeometricAndGapped) {
  auto g = geometric(Rational(1, 2), 4);
  EXPECT_EQ(g, (std::vector<Rational>{Rational(8, 15), Rational(4, 15), Rational(2, 15), Rational(1, 15)}));
  // Support {0, 2}: only products of support letters are constrained, so g2^2 = g0 g4 suffices.
  std::vector<Rational> gg{Rational(1), Rational(0), Rational(5), Rational(0), Rational(25)};
  auto r = almost_geometric(3, {0, 2}, gg);
  EXPECT_EQ(r, (std::vector<Rational>{Rational(1, 6), Rational(0), Rational(5, 6)}));
  for (Letter u : {0, 2})
    for (Letter v : {0, 2})
      EXPECT_EQ(r[static_cast<std::size_t>(u)] * r[static_cast<std::size_t>(v)] / (r[0] * r[0]),
                gg[static_cast<std::size_t>(u + v)] / gg[0]);
  std::vector<Rational> bad{Rational(1), Rational(1), Rational(3), Rational(1), Rational(1)};
  EXPECT_THROW(almost_geometric(3, {0, 1, 2}, bad), Error);
  EXPECT_THROW(almost_geometric(3, {}, bad), Error);
}

TEST(ZeroRange, MassPreservingOnTruncations) {
  for (int k = 2; k <= 5; ++k) {
    auto spec = models::zero_range([](int a, int j) { return Rational(a + j, 2); }, k);
    EXPECT_TRUE(mass_preserving(*spec.T));
  }
}

TEST(ZeroRange, AlmostGeometricFamilyIsInvariantTogether) {
  // With one invariant geometric product, every geometric product on the same support is invariant.
  for (int k = 2; k <= 5; ++k) {
    auto spec = models::zero_range([](int, int) { return Rational(1); }, k);
    ASSERT_TRUE(check_product_line(*spec.T, geometric(Rational(1, 2), k)).invariant()) << k;
    for (int trial = 0; trial < 5; ++trial)
      EXPECT_TRUE(check_product_line(*spec.T, geometric(positive_rational(7, 7), k)).invariant()) << k;
  }
}

TEST(ZeroRange, NonInvariantFamilyStaysNonInvariant) {
  // g(a, k) = a breaks the product form: no geometric product is invariant.
  auto spec = models::zero_range([](int a, int) { return Rational(a); }, 4);
  for (int trial = 0; trial < 5; ++trial)
    EXPECT_FALSE(check_product_line(*spec.T, geometric(positive_rational(7, 7), 4)).invariant());
}

TEST(PushTasep, GeometricProductsBalanceInsideTheTruncation) {
  for (int k = 3; k <= 6; ++k) {
    auto spec = models::pushtasep_blocks(k);
    EXPECT_TRUE(mass_preserving(*spec.T));
    for (Rational q : {Rational(1, 2), Rational(2, 3), Rational(3)}) {
      auto tr = truncation_residual(*spec.T, geometric(q, k));
      EXPECT_EQ(tr.interior, Rational(0)) << k;
      EXPECT_GT(tr.interior_words, 0u);
    }
  }
}

TEST(PushTasep, BlockMoves) {
  auto T = models::pushtasep_blocks(4).T.value();
  EXPECT_EQ(T.rate({1, 2}, {0, 3}), Rational(1));
  EXPECT_EQ(T.rate({1, 2}, {2, 1}), Rational(1));
  EXPECT_EQ(T.rate({1, 2}, {3, 0}), Rational(1));
  EXPECT_EQ(T.rate({3, 2}, {0, 0}), Rational(0));
}

TEST(Kappa2General, Template) {
  auto spec = models::kappa2_general({{{1, 2}, Rational(2)}, {{2, 1}, Rational(3)}});
  EXPECT_EQ(spec.T->rate({0, 1}, {1, 0}), Rational(2));
  EXPECT_EQ(spec.T->rate({1, 0}, {0, 1}), Rational(3));
  EXPECT_THROW(models::kappa2_general({{{1, 1}, Rational(1)}}), Error);
  EXPECT_THROW(models::kappa2_general({{{4, 1}, Rational(1)}}), Error);
}

TEST(Tasep3, CyclicVariantHasNoPositiveMarkovLaw) {
  auto spec = models::tasep3(1, 1, 1, models::Tasep3Variant::cyclic);
  auto set = find_markov(*spec.T);
  for (const auto& c : set.candidates) EXPECT_FALSE(c.line_invariant && !c.numeric);
}

TEST(Exchange3, SymmetricExchangeKeepsEveryProduct) {
  std::map<std::pair<Letter, Letter>, Rational> rates;
  for (Letter a = 0; a < 3; ++a)
    for (Letter b = 0; b < 3; ++b)
      if (a != b) rates[{a, b}] = Rational(a + b + 1);
  auto spec = models::exchange3(rates);
  EXPECT_TRUE(check_product_line(*spec.T, testing_support::random_distribution(3)).invariant());
}
