#include <gtest/gtest.h>

#include "support.hpp"

using namespace ipsinv;
using testing_support::positive_rational;
using testing_support::random_distribution;
using testing_support::uniform_int;

namespace {

Rational torus_residual(const SquareJRM<Rational>& T2, const std::vector<Rational>& rho, int n = 3) {
  auto G = build_torus_generator(T2.T, n);
  return stationarity_residual(G, product_measure(rho, static_cast<std::size_t>(n * n)));
}

/// Square rates in detailed balance with the product rho.
SquareJRM<Rational> reversible_square(const std::vector<Rational>& rho, int pairs) {
  const int k = static_cast<int>(rho.size());
  SquareJRM<Rational> T2(k);
  auto weight = [&](WordCode c) {
    Rational p = 1;
    for (Letter a : decode(c, k, 4)) p *= rho[static_cast<std::size_t>(a)];
    return p;
  };
  auto words = static_cast<int>(ipow(k, 4));
  for (int i = 0; i < pairs; ++i) {
    auto a = static_cast<WordCode>(uniform_int(0, words - 1)), b = static_cast<WordCode>(uniform_int(0, words - 1));
    if (a == b) continue;
    Rational r = positive_rational(3, 2);
    T2.T.set_code(a, b, r);
    T2.T.set_code(b, a, r * weight(a) / weight(b));
  }
  return T2;
}

}  // namespace

TEST(Shapes, GammaSets) {
  EXPECT_EQ(Shape::gamma0().size(), 3u);
  EXPECT_TRUE(Shape::gamma1().contains({2, 0}));
  EXPECT_TRUE(Shape::gamma2().contains({1, 1}));
  EXPECT_EQ(Shape::hypercube(3).size(), 9u);
}

TEST(BoldZ, PartialSumsMatchFullSums) {
  auto rho = random_distribution(2);
  auto T2 = reversible_square(rho, 4);
  T2.T.set_code(3, 12, Rational(1, 3));
  Lattice2DContext<Rational> ctx(T2, rho);
  // Free cells (-1) are summed against rho.
  for (WordCode c = 0; c < 8; ++c) {
    Word w = decode(c, 2, 3);
    Word partial{w[0], w[1], w[2], -1};
    Rational expect = 0;
    for (Letter d = 0; d < 2; ++d) expect += rho[static_cast<std::size_t>(d)] * ctx.boldz({w[0], w[1], w[2], d});
    EXPECT_EQ(ctx.boldz_partial(partial), expect);
  }
}

TEST(Flip3, InvariantBernoulliFromQuadratic) {
  // (a - 1) r^2 + 2 r - 1 = 0 has the root r = 1/(1 + sqrt(a)).
  for (Rational q : {Rational(2), Rational(3), Rational(1, 2), Rational(3, 2)}) {
    Rational a = q * q, r = 1 / (1 + q);
    EXPECT_EQ((a - 1) * r * r + 2 * r - 1, Rational(0));
    auto spec = models::flip3_2d(a);
    ASSERT_TRUE(spec.rho.has_value());
    EXPECT_EQ((*spec.rho)[1], r);
    Lattice2DContext<Rational> ctx(*spec.square, *spec.rho);
    EXPECT_TRUE(check_product_2d(ctx).invariant());
    EXPECT_TRUE(check_product_qdq(ctx).invariant());
    EXPECT_EQ(torus_residual(*spec.square, *spec.rho), Rational(0));
  }
}

TEST(Flip3, OtherDensitiesFail) {
  auto spec = models::flip3_2d(4);
  std::vector<Rational> rho{Rational(1, 2), Rational(1, 2)};
  EXPECT_FALSE(check_product_2d(*spec.square, rho).invariant());
  EXPECT_GT(torus_residual(*spec.square, rho), 0);
}

TEST(PairFlip, InvariantIffRatesEqual) {
  for (int trial = 0; trial < 5; ++trial) {
    auto rho = random_distribution(2);
    Rational a = positive_rational(), b = a + positive_rational();
    auto same = models::pair_flip_2d(a, a);
    EXPECT_TRUE(check_product_2d(*same.square, rho).invariant());
    auto diff = models::pair_flip_2d(a, b);
    auto rep = check_product_2d(*diff.square, rho);
    EXPECT_FALSE(rep.invariant());
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_GT(torus_residual(*diff.square, rho), 0);
  }
}

TEST(Rotation, AllBernoulliInvariantIffRatesEqual) {
  for (int trial = 0; trial < 4; ++trial) {
    auto rho = random_distribution(2);
    Rational a = positive_rational();
    auto eq = models::rotation_2d(a, a, a, a);
    EXPECT_TRUE(check_product_2d(*eq.square, rho).invariant());
    EXPECT_EQ(torus_residual(*eq.square, rho), Rational(0));
    auto neq = models::rotation_2d(a, a + 1, a, a);
    EXPECT_FALSE(check_product_2d(*neq.square, rho).invariant());
  }
}

TEST(CornerMove, NoProductIsInvariant) {
  auto spec = models::corner_move_2d();
  for (int i = 1; i < 10; ++i) {
    std::vector<Rational> rho{Rational(i, 10), Rational(10 - i, 10)};
    EXPECT_FALSE(check_product_2d(*spec.square, rho).invariant());
  }
}

TEST(ThreeColour, BalancedFourthPowers) {
  auto spec = models::three_colour_2d(16, 1, 1);
  EXPECT_TRUE(check_product_2d(*spec.square, {Rational(1, 5), Rational(2, 5), Rational(2, 5)}).invariant());
  EXPECT_FALSE(check_product_2d(*spec.square, {Rational(1, 3), Rational(1, 3), Rational(1, 3)}).invariant());
  auto uniform = models::three_colour_2d(2, 2, 2);
  EXPECT_TRUE(check_product_2d(*uniform.square, *uniform.rho).invariant());
}

TEST(MassPreserving, BallMoveInteriorAndUrnShift) {
  auto ball = models::ball_move_2d(4, [](int) { return Rational(1); });
  EXPECT_TRUE(mass_preserving(ball.square->T));
  auto checks = check_mass_preserving_multinomial(*ball.square, {Rational(1, 2), Rational(1), Rational(2)});
  for (const auto& c : checks) EXPECT_TRUE(c.interior_zero);
  auto shift = models::urn_shift_2d(3, [](int n) { return Rational(n + 1); });
  for (int trial = 0; trial < 3; ++trial)
    EXPECT_TRUE(check_boldz_sufficient(*shift.square, random_distribution(3)));
  EXPECT_THROW(check_mass_preserving_multinomial(*models::flip3_2d(4).square, {Rational(1)}), Error);
}

TEST(Criterion2D, ReversibleSquaresAreInvariantOnTorus) {
  for (int trial = 0; trial < 8; ++trial) {
    auto rho = random_distribution(2);
    auto T2 = reversible_square(rho, 4);
    Lattice2DContext<Rational> ctx(T2, rho);
    EXPECT_TRUE(check_product_2d(ctx).invariant());
    EXPECT_EQ(torus_residual(T2, rho), Rational(0));
  }
}

TEST(Criterion2D, AgreesWithGeneralFormAndOracle) {
  int invariant = 0;
  for (int trial = 0; trial < 12; ++trial) {
    auto rho = random_distribution(2);
    SquareJRM<Rational> T2(2);
    for (int i = 0; i < uniform_int(1, 4); ++i) {
      auto a = static_cast<WordCode>(uniform_int(0, 15)), b = static_cast<WordCode>(uniform_int(0, 15));
      if (a != b) T2.T.set_code(a, b, positive_rational(3, 2));
    }
    Lattice2DContext<Rational> ctx(T2, rho);
    bool inv = check_product_2d(ctx).invariant();
    EXPECT_EQ(inv, check_product_qdq(ctx).invariant());
    if (inv) {
      ++invariant;
      EXPECT_EQ(torus_residual(T2, rho), Rational(0));
    }
  }
  EXPECT_LT(invariant, 12);
}

TEST(Criterion2D, FloatModeMatches) {
  auto spec = models::flip3_2d(4);
  SquareJRM<double> T2(spec.square->T.convert<double>());
  EXPECT_TRUE(check_product_2d(T2, {2.0 / 3.0, 1.0 / 3.0}).invariant());
  EXPECT_FALSE(check_product_2d(T2, {0.5, 0.5}).invariant());
}
