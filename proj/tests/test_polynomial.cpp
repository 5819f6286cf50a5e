#include <gtest/gtest.h>

#include <cmath>

#include "psdpencil/polynomial.hpp"

using namespace psdpencil;

namespace {
UniPoly P(std::vector<Rational> c) { return UniPoly(std::move(c)); }
}  // namespace

TEST(UniPoly, Arithmetic) {
  const auto a = P({-1, 0, 1});  // x² − 1
  const auto b = P({1, 1});      // x + 1
  EXPECT_EQ(a.degree(), 2);
  EXPECT_EQ(a * b, P({-1, -1, 1, 1}));
  const auto [q, r] = divmod(a, b);
  EXPECT_EQ(q, P({-1, 1}));
  EXPECT_TRUE(r.is_zero());
  EXPECT_EQ(gcd(a, P({1, 2, 1})), b);
  EXPECT_EQ(a.derivative(), P({0, 2}));
  EXPECT_EQ(a(Rational(3)), 8);
  EXPECT_DOUBLE_EQ(a.eval(0.5), -0.75);
  EXPECT_TRUE((a - a).is_zero());
  EXPECT_EQ(P({0, 0, 3, 1}).low_order(), 2u);
  EXPECT_EQ(P({0, 0, 3, 1}).shift_down(2), P({3, 1}));
}

TEST(UniPoly, SquarefreeFactors) {
  // (x − 1)³ (x + 2)
  const auto f = P({-1, 1}) * P({-1, 1}) * P({-1, 1}) * P({2, 1});
  const auto fac = squarefree_factors(f);
  ASSERT_EQ(fac.size(), 2u);
  EXPECT_EQ(fac[0].first, P({2, 1}));
  EXPECT_EQ(fac[0].second, 1);
  EXPECT_EQ(fac[1].first, P({-1, 1}));
  EXPECT_EQ(fac[1].second, 3);
}

TEST(RealRoots, IsolatesWithMultiplicity) {
  // (x − 1/3)² (x² − 2) (x² + 1)
  const auto f = P({Rational(-1, 3), 1}) * P({Rational(-1, 3), 1}) * P({-2, 0, 1}) * P({1, 0, 1});
  const auto roots = real_roots(f);
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_NEAR(roots[0].value(), -std::sqrt(2.0), 1e-11);
  EXPECT_NEAR(roots[1].value(), 1.0 / 3.0, 1e-11);
  EXPECT_EQ(roots[1].multiplicity, 2);
  EXPECT_NEAR(roots[2].value(), std::sqrt(2.0), 1e-11);
  for (const auto& r : roots) EXPECT_LE(r.error_bound(), 1e-12);
}

TEST(BivariatePoly, AlgebraAndSlices) {
  // x² − t²
  auto p = BivariatePoly::term(1, 0, 2) - BivariatePoly::term(1, 2, 0);
  EXPECT_EQ(p.x_degree(), 2);
  EXPECT_EQ(p.at_t(Rational(3)), P({-9, 0, 1}));
  EXPECT_EQ(p.x_coefficient(0), P({0, 0, -1}));
  EXPECT_FALSE(p.contains({1, 1}));
  auto q = p * p;
  EXPECT_EQ(q.coefficient({2, 2}), -2);
  EXPECT_TRUE((p - p).is_zero());
  p.add_term({2, 0}, 1);
  EXPECT_FALSE(p.contains({2, 0}));  // zero coefficients are never stored
}
