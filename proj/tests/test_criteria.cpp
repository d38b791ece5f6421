#include <gtest/gtest.h>

#include "support.hpp"

using namespace ipsinv;
using testing_support::positive_rational;
using testing_support::random_distribution;
using testing_support::uniform_int;

namespace {

JumpRateMatrix<Rational> tasep() {
  JumpRateMatrix<Rational> T(2, 2);
  T.set({1, 0}, {0, 1}, 1);
  return T;
}

JumpRateMatrix<Rational> tasep3(Rational r10, Rational r20, Rational r21) {
  JumpRateMatrix<Rational> T(3, 2);
  T.set({1, 0}, {0, 1}, r10);
  T.set({2, 0}, {0, 2}, r20);
  T.set({2, 1}, {1, 2}, r21);
  return T;
}

/// max over states of |(mu Q)(x)| on Z/nZ for the Gibbs measure of the law.
Rational cycle_oracle(const JumpRateMatrix<Rational>& T, const StationaryLaw<Rational>& law, int n) {
  auto G = build_cycle_generator(T, n);
  auto mu = law.memory() == 0 ? product_measure(law.rho(), static_cast<std::size_t>(n)) : gibbs_measure(law.kernel(), n);
  return stationarity_residual(G, mu);
}

}  // namespace

TEST(LocalBalance, IsingHasThirtyTwoZeroValues) {
  auto spec = models::stochastic_ising(Rational(1, 2));
  CriterionContext<Rational> ctx(*spec.T, StationaryLaw<Rational>(*spec.kernel, *spec.rho));
  EXPECT_EQ(ctx.s, 5);
  EXPECT_EQ(ctx.h, 9);
  auto z = z_table(ctx);
  EXPECT_EQ(z.values().size(), 32u);
  for (const auto& v : z.values()) EXPECT_EQ(v, Rational(0));
  EXPECT_TRUE(locally_reversible(ctx));
}

TEST(LocalBalance, TasepBernoulliValuesByHand) {
  // Z(a b c) for a product law is sum_u T[u -> b] rho(u)/rho(b) - T_out(b), independent of a and c.
  Rational p = Rational(1, 3);
  auto z = z_table(product_context(tasep(), {1 - p, p}));
  EXPECT_EQ(z.at({1, 0}), Rational(-1));
  EXPECT_EQ(z.at({0, 1}), Rational(1));
  EXPECT_EQ(z.at({0, 0}), Rational(0));
  EXPECT_EQ(z.at({1, 1}), Rational(0));
}

TEST(LineCriterion, TasepBernoulliIsInvariant) {
  for (Rational p : {Rational(1, 4), Rational(1, 2), Rational(9, 10)}) {
    auto rep = check_product_line(tasep(), {1 - p, p});
    EXPECT_TRUE(rep.invariant());
    ASSERT_TRUE(rep.certificate.has_value());
    // s - 1 = 1 and W(y) = Z(0 y).
    EXPECT_EQ((*rep.certificate)({1}) - (*rep.certificate)({0}), Rational(1));
  }
}

TEST(LineCriterion, Tasep3WitnessAndNecessaryCondition) {
  auto bad = check_product_line(tasep3(1, 1, 1), {Rational(1, 3), Rational(1, 3), Rational(1, 3)});
  ASSERT_FALSE(bad.invariant());
  ASSERT_TRUE(bad.witness.has_value());
  // First failing word in lexicographic order of a.0^(s-1): NCycle_3(1,2,0) = -t20 + t21 + t10.
  EXPECT_EQ(bad.witness->word, (Word{1, 2, 0}));
  EXPECT_EQ(bad.witness->residual, Rational(1));
  for (int trial = 0; trial < 20; ++trial) {
    Rational r10 = positive_rational(), r21 = positive_rational();
    auto rho = random_distribution(3);
    EXPECT_TRUE(check_product_line(tasep3(r10, r10 + r21, r21), rho).invariant());
    Rational off = r10 + r21 + positive_rational(3, 7);
    auto rep = check_product_line(tasep3(r10, off, r21), rho);
    EXPECT_FALSE(rep.invariant());
  }
}

TEST(LineCriterion, WitnessIsFirstFailureInLexOrder) {
  for (int trial = 0; trial < 40; ++trial) {
    auto T = testing_support::random_jrm(2, 2, 4);
    auto law = testing_support::random_law(2);
    auto z = z_table(CriterionContext<Rational>(T, law));
    auto rep = check_markov_line(z);
    if (rep.invariant()) continue;
    const auto& ctx = z.context();
    Word first;
    for (WordCode c = 0; c < ipow(2, ctx.s); ++c) {
      Word x = decode(c, 2, ctx.s);
      x.resize(static_cast<std::size_t>(ctx.h), 0);
      if (ncycle(z, x) != 0) {
        first = x;
        break;
      }
    }
    EXPECT_EQ(rep.witness->word, first);
  }
}

TEST(LineCriterion, CertificateReproducesZ) {
  int seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int k = uniform_int(2, 3);
    auto rho = random_distribution(k);
    auto T = testing_support::reversible_jrm(rho, 2, 3);
    auto z = z_table(product_context(T, rho));
    auto rep = check_markov_line(z);
    ASSERT_TRUE(rep.invariant());
    const auto& W = *rep.certificate;
    const int s = z.context().s;
    for (WordCode c = 0; c < ipow(k, s); ++c) {
      Word w = decode(c, k, s);
      EXPECT_EQ(z.at(w), W(subword(w, 1, static_cast<std::size_t>(s - 1))) - W(subword(w, 0, static_cast<std::size_t>(s - 1))));
    }
    ++seen;
  }
  EXPECT_EQ(seen, 60);
}

TEST(CycleCriterion, MatchesGeneratorOracle) {
  for (int trial = 0; trial < 60; ++trial) {
    int k = uniform_int(2, 3), L = uniform_int(2, 3);
    auto T = testing_support::random_jrm(k, L, 6);
    auto law = uniform_int(0, 1) ? testing_support::random_law(k) : StationaryLaw<Rational>::product(random_distribution(k));
    auto z = z_table(CriterionContext<Rational>(T, law));
    for (int n = 1; n <= (k == 2 ? 6 : 4); ++n) {
      bool crit = check_markov_cycle(z, n).invariant();
      bool oracle = cycle_oracle(T, law, n) == 0;
      EXPECT_EQ(crit, oracle) << "n=" << n;
    }
  }
}

TEST(CycleCriterion, LineInvariantLawIsCycleInvariant) {
  auto spec = models::stochastic_ising(Rational(2, 3));
  StationaryLaw<Rational> law(*spec.kernel, *spec.rho);
  for (int n = 1; n <= 7; ++n) EXPECT_EQ(cycle_oracle(*spec.T, law, n), Rational(0));
}

TEST(SmallCycles, NecessaryButNotSufficient) {
  // Z-window sums vanish on cycles of length 1 and 2, the line balance does not.
  JumpRateMatrix<Rational> T(2, 2);
  T.set({1, 0}, {1, 1}, Rational(2));
  T.set({1, 1}, {1, 0}, Rational(1));
  MarkovKernel<Rational> M(2, 1, {{Rational(3, 4), Rational(1, 4)}, {Rational(1, 2), Rational(1, 2)}});
  auto law = stationary_distribution(M);
  auto z = z_table(CriterionContext<Rational>(T, law));
  EXPECT_TRUE(check_markov_small_cycles(z).invariant());
  auto line = check_markov_line(z);
  ASSERT_FALSE(line.invariant());
  EXPECT_EQ(line.witness->word, (Word{0, 0, 0, 1, 0, 0, 0}));
  EXPECT_NE(cycle_oracle(T, law, 7), Rational(0));
}

TEST(SmallCycles, ImpliedByLineInvariance) {
  for (int trial = 0; trial < 30; ++trial) {
    auto rho = random_distribution(2);
    auto T = testing_support::reversible_jrm(rho, 2, 3);
    auto z = z_table(product_context(T, rho));
    EXPECT_TRUE(check_markov_small_cycles(z).invariant());
  }
}

TEST(Equivalences, NinePredicatesAgreeOnRandomInstances) {
  int invariant = 0;
  for (int trial = 0; trial < 40; ++trial) {
    int k = uniform_int(2, 3);
    JumpRateMatrix<Rational> T(k, 2);
    std::optional<StationaryLaw<Rational>> law;
    if (trial % 2 == 0) {
      auto rho = random_distribution(k);
      T = testing_support::reversible_jrm(rho, 2, 3);
      law = StationaryLaw<Rational>::product(rho);
    } else {
      T = testing_support::random_jrm(k, 2, 6);
      law = testing_support::random_law(k);
    }
    auto rep = check_master_replace_equivalences(CriterionContext<Rational>(T, *law));
    EXPECT_TRUE(rep.predicates_agree());
    EXPECT_TRUE(rep.cycle_pairs_agree() || !rep.cycle_pairs_applicable);
    invariant += rep.predicates[0];
  }
  EXPECT_GT(invariant, 0);
  EXPECT_LT(invariant, 40);
}

TEST(BalancedSum, VanishesForEveryInstance) {
  for (int trial = 0; trial < 40; ++trial) {
    int k = uniform_int(2, 3), L = uniform_int(1, 3);
    auto T = testing_support::random_jrm(k, L, 6);
    auto law = testing_support::random_law(k);
    auto z = z_table(CriterionContext<Rational>(T, law));
    for (WordCode a = 0; a < static_cast<WordCode>(k); ++a)
      for (WordCode c = 0; c < static_cast<WordCode>(k); ++c)
        EXPECT_EQ(balanced_sum(z, decode(a, k, 1), decode(c, k, 1)), Rational(0));
  }
}

TEST(Support, RestrictionToClosedSubalphabet) {
  auto T = tasep3(1, 1, 1);
  auto r = restrict_support(T, {Rational(1, 2), Rational(1, 2), Rational(0)}, {0, 1});
  ASSERT_TRUE(r.closed);
  EXPECT_TRUE(check_markov_line(CriterionContext<Rational>(*r.T, *r.law)).invariant());
  auto esc = restrict_support(models::contact(Rational(1)).T.value(), {Rational(0), Rational(1)}, {1});
  EXPECT_FALSE(esc.closed);
  ASSERT_TRUE(esc.escape.has_value());
  auto dirac = restrict_support(models::contact(Rational(1)).T.value(), {Rational(1), Rational(0)}, {0});
  EXPECT_TRUE(dirac.closed && dirac.dirac);
  EXPECT_THROW(product_context(T, {Rational(1, 2), Rational(1, 2), Rational(0)}), Error);
}

TEST(GeneralGraph, SymmetricPairRatesUseTwoCycles) {
  PairRateField<Rational> p;
  p.p[{1}] = 1;
  p.p[{-1}] = 1;
  p.p[{2}] = Rational(1, 2);
  p.p[{-2}] = Rational(1, 2);
  auto rho = std::vector<Rational>{Rational(1, 3), Rational(2, 3)};
  auto rep = check_product_general_graph(tasep(), rho, p);
  EXPECT_TRUE(rep.invariant());
  EXPECT_EQ(rep.criterion, "ncycle_2");
  // Oracle: the product measure is stationary on the pair-rate cycle.
  for (int n = 5; n <= 7; ++n) {
    auto G = build_pair_rate_cycle_generator(tasep(), p, n);
    EXPECT_EQ(stationarity_residual(G, product_measure(rho, static_cast<std::size_t>(n))), Rational(0));
  }
}

TEST(GeneralGraph, AsymmetricPairRatesUseLineCriterion) {
  PairRateField<Rational> p;
  p.p[{1}] = 1;
  auto rep = check_product_general_graph(tasep3(1, 1, 1), {Rational(1, 3), Rational(1, 3), Rational(1, 3)}, p);
  EXPECT_FALSE(rep.invariant());
}

TEST(FloatMode, AgreesWithExactOnRandomInstances) {
  for (int trial = 0; trial < 30; ++trial) {
    int k = uniform_int(2, 3);
    auto rho = random_distribution(k);
    auto T = trial % 2 ? testing_support::reversible_jrm(rho, 2, 3) : testing_support::random_jrm(k, 2, 5);
    bool exact = check_product_line(T, rho).invariant();
    std::vector<double> rd;
    for (const auto& v : rho) rd.push_back(to_double(v));
    bool flt = check_product_line(T.convert<double>(), rd).invariant();
    EXPECT_EQ(exact, flt);
  }
}

TEST(Context, RejectsZeroKernelEntries) {
  MarkovKernel<Rational> M(2, 1, {{Rational(1), Rational(0)}, {Rational(1, 2), Rational(1, 2)}});
  EXPECT_THROW(CriterionContext<Rational>(tasep(), stationary_distribution(M)), Error);
}
