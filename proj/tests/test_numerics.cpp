#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace ipsinv;
using testing_support::positive_rational;
using testing_support::uniform_int;

TEST(SolveLinear, UniqueAffineEmpty) {
  DenseMatrix<Rational> A{{1, 2}, {3, 4}};
  auto s = solve_linear(A, {Rational(5), Rational(6)});
  ASSERT_EQ(s.kind, SolutionKind::unique);
  EXPECT_EQ(s.particular, (std::vector<Rational>{Rational(-4), Rational(9, 2)}));

  DenseMatrix<Rational> B{{1, 1}, {2, 2}};
  auto a = solve_linear(B, {Rational(1), Rational(2)});
  ASSERT_EQ(a.kind, SolutionKind::affine);
  EXPECT_EQ(a.dimension(), 1u);
  auto p = a.point({Rational(7)});
  EXPECT_EQ(p[0] + p[1], Rational(1));

  EXPECT_EQ(solve_linear(B, {Rational(1), Rational(3)}).kind, SolutionKind::empty);
}

TEST(SolveLinear, RandomSystemsSatisfyEquations) {
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t r = static_cast<std::size_t>(uniform_int(1, 5)), c = static_cast<std::size_t>(uniform_int(1, 5));
    DenseMatrix<Rational> A(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) A(i, j) = uniform_int(0, 2) ? Rational(uniform_int(-3, 3)) : Rational(0);
    std::vector<Rational> x0(c);
    for (auto& v : x0) v = Rational(uniform_int(-4, 4), uniform_int(1, 3));
    auto b = A.apply(x0);
    auto s = solve_linear(A, b);
    ASSERT_NE(s.kind, SolutionKind::empty);
    EXPECT_EQ(A.apply(s.particular), b);
    for (const auto& v : s.basis) EXPECT_EQ(A.apply(v), std::vector<Rational>(r, Rational(0)));
    EXPECT_EQ(rank(A) + s.dimension(), c);
    EXPECT_EQ(nullspace(A).size(), s.dimension());
  }
}

TEST(SolveLinear, FloatMatchesExact) {
  DenseMatrix<Rational> A{{2, 1, 0}, {1, 3, 1}, {0, 1, 4}};
  std::vector<Rational> b{Rational(1), Rational(2), Rational(3)};
  auto e = solve_linear(A, b);
  auto f = solve_linear(A.convert<double>(), {1.0, 2.0, 3.0});
  ASSERT_EQ(f.kind, SolutionKind::unique);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f.particular[i], to_double(e.particular[i]), 1e-12);
}

TEST(StationaryDistribution, HmcKernel) {
  MarkovKernel<Rational> M(3, 1,
                           {{Rational(7, 15), Rational(1, 3), Rational(1, 5)},
                            {Rational(1, 2), Rational(1, 6), Rational(1, 3)},
                            {Rational(1, 6), Rational(1, 2), Rational(1, 3)}});
  auto law = stationary_distribution(M);
  std::vector<Rational> r{Rational(35, 89), Rational(29, 89), Rational(25, 89)};
  EXPECT_EQ(law.rho(), r);
  // Independent check: r M = r.
  for (int b = 0; b < 3; ++b) {
    Rational s = 0;
    for (int a = 0; a < 3; ++a) s += r[static_cast<std::size_t>(a)] * M(static_cast<WordCode>(a), b);
    EXPECT_EQ(s, r[static_cast<std::size_t>(b)]);
  }
}

TEST(StationaryDistribution, ReducibleKernelIsRejected) {
  MarkovKernel<Rational> M(2, 1, {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}});
  EXPECT_THROW(stationary_distribution(M), Error);
}

TEST(StationaryDistribution, RandomKernelsAreStationary) {
  for (int trial = 0; trial < 30; ++trial) {
    int k = uniform_int(2, 3), m = uniform_int(1, 2);
    auto M = testing_support::random_kernel(k, m);
    auto law = stationary_distribution(M);
    auto P = block_transition_matrix(M);
    EXPECT_EQ(P.apply_left(law.rho()), law.rho());
  }
}

TEST(PerronPair, PositiveMatrix) {
  DenseMatrix<double> A{{2, 1}, {1, 2}};
  auto p = perron_pair(A);
  EXPECT_NEAR(p.eigenvalue, 3.0, 1e-12);
  EXPECT_NEAR(p.right[0], p.right[1], 1e-12);
  double lr = p.left[0] * p.right[0] + p.left[1] * p.right[1];
  EXPECT_NEAR(lr, 1.0, 1e-12);
}

TEST(PerronPair, RejectsReducibleAndNegative) {
  EXPECT_THROW(perron_pair(DenseMatrix<double>{{1, 0}, {1, 1}}), Error);
  EXPECT_THROW(perron_pair(DenseMatrix<double>{{1, -1}, {1, 1}}), Error);
}

TEST(PerronPair, PeriodicIrreducibleMatrix) {
  // Period 2; power iteration on A + I still converges.
  auto p = perron_pair(DenseMatrix<double>{{0, 2}, {8, 0}});
  EXPECT_NEAR(p.eigenvalue, 4.0, 1e-10);
}

TEST(PerronPair, ExactWhenRational) {
  for (int trial = 0; trial < 30; ++trial) {
    // A = D P D^{-1} * lambda with P stochastic has Perron eigenvalue lambda.
    auto M = testing_support::random_kernel(3, 1);
    Rational lambda = positive_rational(5, 4);
    std::vector<Rational> d{positive_rational(), positive_rational(), positive_rational()};
    DenseMatrix<Rational> A(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) A(i, j) = lambda * d[i] * M(i, static_cast<Letter>(j)) / d[j];
    auto e = exact_perron_pair(A);
    ASSERT_TRUE(e.has_value());
    EXPECT_EQ(e->eigenvalue, lambda);
    auto Ar = A.apply(e->right);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(Ar[i], lambda * e->right[i]);
  }
}

TEST(PerronPair, IrrationalEigenvalueIsNotExact) {
  DenseMatrix<Rational> A{{1, 1}, {1, 0}};
  EXPECT_FALSE(exact_perron_pair(A).has_value());
  auto f = perron_pair(A.convert<double>());
  EXPECT_NEAR(f.eigenvalue, (1 + std::sqrt(5.0)) / 2, 1e-12);
}
