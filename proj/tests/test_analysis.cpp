#include <gtest/gtest.h>

#include <cmath>

#include "psdpencil/analysis.hpp"
#include "psdpencil/random.hpp"

using namespace psdpencil;

namespace {

ExactMatrix kernel3_b(long b1, long b2, long b3, long b4, long u) {
  return ExactMatrix{{b1, b2, b3, b4}, {b2, 1, 1, 1}, {b3, 1, u, 0}, {b4, 1, 0, 0}};
}

ExactMatrix mixed_degrees_b() { return ExactMatrix{{0, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, -2, 0}, {1, 0, 0, 0}}; }

ExactMatrix a_e1(std::size_t n) {
  ExactMatrix a(n, n);
  a(0, 0) = 1;
  return a;
}

APTrace synthetic(std::size_t first, std::size_t last, double (*f)(double)) {
  APTrace tr;
  for (std::size_t k = first; k <= last; ++k) tr.rows.push_back({k, f(static_cast<double>(k)), f(static_cast<double>(k))});
  return tr;
}

// Random orthogonal matrix from Jacobi eigenvectors of a random symmetric matrix.
std::vector<double> random_orthogonal(Rng& g, std::size_t n) {
  FloatSymMatrix s(n);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) s(i, j) = s(j, i) = u(g);
  const auto e = eigh(s);
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q[i * n + j] = e.vectors[j][i];
  return q;
}

FloatSymMatrix conjugate(const std::vector<double>& q, const ExactMatrix& m) {
  const std::size_t n = m.rows();
  FloatSymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) s += q[i * n + x] * m(x, y).get_d() * q[j * n + y];
      out(i, j) = s;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
  return out;
}

}  // namespace

TEST(Canonicalize, DiagonalExactIsPermutation) {
  const ExactMatrix a{{0, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 3}};
  const auto cf = canonicalize_exact(a, mixed_degrees_b());
  EXPECT_TRUE(cf.exact);
  EXPECT_EQ(cf.pencil.m(), 2u);
  EXPECT_EQ(cf.pencil.p(), (std::vector<Rational>{2, 3}));
  EXPECT_EQ(cf.residual, 0);
  // Q is a permutation: each row and column has a single 1.
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < 4; ++j) row += cf.q[i * 4 + j];
    EXPECT_EQ(row, 1);
  }
  const auto id = canonicalize_exact(ExactMatrix{{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}, mixed_degrees_b());
  EXPECT_EQ(id.pencil.B(), mixed_degrees_b());
}

TEST(Canonicalize, FullRankIsLinearEarlyExit) {
  const auto cf = canonicalize_exact(ExactMatrix::identity(3), ExactMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}});
  EXPECT_EQ(cf.pencil.m(), 0u);
  EXPECT_TRUE(cf.pencil.full_rank());
  const auto pr = classify(cf.pencil);
  EXPECT_EQ(pr.predicted, RateClass::Linear);
  EXPECT_NE(pr.reason.find("full rank"), std::string::npos);
}

TEST(Canonicalize, RejectsNonPsd) {
  EXPECT_THROW(canonicalize_exact(ExactMatrix{{1, 0}, {0, -1}}, ExactMatrix::identity(2)), DomainError);
  EXPECT_THROW(canonicalize_exact(ExactMatrix{{1, 2}, {2, 1}}, ExactMatrix::identity(2)), DomainError);
}

TEST(Canonicalize, RotationRoundTrip) {
  Rng g(401);
  for (long u : {1L, 0L}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto q = random_orthogonal(g, 4);
      const auto b = kernel3_b(0, 1, 1, 0, u);
      const auto cf = canonicalize(conjugate(q, a_e1(4)), conjugate(q, b));
      EXPECT_FALSE(cf.exact);
      EXPECT_EQ(cf.pencil.m(), 3u);
      ASSERT_EQ(cf.pencil.p().size(), 1u);
      EXPECT_EQ(cf.pencil.p()[0], 1);
      EXPECT_LT(cf.residual, 1e-6);
      const auto direct = classify(PerturbedPencil({1}, b));
      const auto rotated = classify(cf.pencil);
      EXPECT_EQ(rotated.predicted, direct.predicted) << "u = " << u;
      EXPECT_EQ(rotated.sd.rank_gap, direct.sd.rank_gap);
      EXPECT_EQ(rotated.sd.b22_semidefiniteness, direct.sd.b22_semidefiniteness);
    }
  }
}

TEST(Classify, Kernel3) {
  auto pr = classify(PerturbedPencil({1}, kernel3_b(0, 1, 1, 0, 1)));
  EXPECT_EQ(pr.predicted, RateClass::Linear);
  EXPECT_EQ(pr.sd.rank_gap, 0);
  pr = classify(PerturbedPencil({1}, kernel3_b(0, 1, 1, 0, 0)));
  EXPECT_EQ(pr.predicted, RateClass::SublinearHalf);
  EXPECT_EQ(pr.sd.rank_gap, 1);
  EXPECT_FALSE(pr.tight);  // B22 has eigenvalues 2, −1, 0
  pr = classify(PerturbedPencil({1}, kernel3_b(0, 1, 1, 1, 0)));  // b3 = b4
  EXPECT_EQ(pr.predicted, RateClass::Linear);
}

TEST(Classify, MixedDegreesUpperBoundNotTight) {
  const auto pr = classify(PerturbedPencil({1}, mixed_degrees_b()));
  EXPECT_EQ(pr.predicted, RateClass::SublinearHalf);
  EXPECT_GT(pr.sd.rank_gap, 0);
  EXPECT_FALSE(pr.tight);
  EXPECT_EQ(pr.max_slope, 2);
}

TEST(Classify, ScaleAndConjugationInvariance) {
  Rng g(409);
  // exact rotation (3/5, 4/5) on the last two kernel coordinates
  for (int trial = 0; trial < 60; ++trial) {
    const auto pc = random_pencil(g, 5);
    const auto base = classify(pc);
    for (Rational c : {Rational(2), Rational(-3), Rational(1, 2)}) {
      const auto scaled = classify(PerturbedPencil(pc.p(), c * pc.B()));
      ASSERT_EQ(scaled.predicted, base.predicted);
      ASSERT_EQ(scaled.tight, base.tight);
    }
    if (pc.m() >= 2) {
      const std::size_t n = pc.n();
      ExactMatrix q = ExactMatrix::identity(n);
      q(n - 2, n - 2) = q(n - 1, n - 1) = Rational(3, 5);
      q(n - 2, n - 1) = Rational(-4, 5);
      q(n - 1, n - 2) = Rational(4, 5);
      const auto rot = classify(PerturbedPencil(pc.p(), q.transpose() * pc.B() * q));
      ASSERT_EQ(rot.predicted, base.predicted);
      ASSERT_EQ(rot.tight, base.tight);
      ASSERT_EQ(rot.sd.rank_gap, base.sd.rank_gap);
    }
  }
}

TEST(SdIndicator, Examples) {
  // B22 = diag(1, −1)
  auto sd = sd_indicator(PerturbedPencil({1}, ExactMatrix{{0, 1, 1}, {1, 1, 0}, {1, 0, -1}}));
  EXPECT_EQ(sd.b22_semidefiniteness, Semidefiniteness::Indefinite);
  EXPECT_FALSE(sd.b22_singular);
  // rank-one B22 = (1, 2)(1, 2)ᵀ
  sd = sd_indicator(PerturbedPencil({2, 3}, ExactMatrix{{1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 2}, {0, 1, 2, 4}}));
  EXPECT_EQ(sd.b22_semidefiniteness, Semidefiniteness::PositiveSemidefinite);
  EXPECT_TRUE(sd.b22_singular);
  EXPECT_EQ(sd.rank_gap, 1);
  // PSD B22 with B21 inside its range
  sd = sd_indicator(PerturbedPencil({2, 3}, ExactMatrix{{1, 0, 1, 0}, {0, 1, 2, 0}, {1, 2, 1, 0}, {0, 0, 0, 0}}));
  EXPECT_EQ(sd.rank_gap, 0);
  bool warned = false;
  for (const auto& c : sd.conclusions) warned |= c.find("more than one point") != std::string::npos;
  EXPECT_TRUE(warned);
  sd = sd_indicator(PerturbedPencil({1}, ExactMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}}));
  EXPECT_EQ(sd.b22_semidefiniteness, Semidefiniteness::Zero);
}

TEST(SdIndicator, AgreesWithFloatEigenvalues) {
  Rng g(419);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pc = random_pencil(g, 6);
    if (pc.m() == 0) continue;
    const auto sd = sd_indicator(pc);
    const auto e = eigh(FloatSymMatrix::from_exact(pc.B22()));
    const double scale = std::max(1.0, e.values.empty() ? 0.0 : std::max(std::abs(e.values.front()), std::abs(e.values.back())));
    const bool nonneg = e.values.front() >= -1e-10 * scale, nonpos = e.values.back() <= 1e-10 * scale;
    switch (sd.b22_semidefiniteness) {
      case Semidefiniteness::Zero: ASSERT_TRUE(nonneg && nonpos); break;
      case Semidefiniteness::PositiveSemidefinite: ASSERT_TRUE(nonneg && !nonpos); break;
      case Semidefiniteness::NegativeSemidefinite: ASSERT_TRUE(nonpos && !nonneg); break;
      case Semidefiniteness::Indefinite: ASSERT_TRUE(!nonneg && !nonpos); break;
    }
    ASSERT_EQ(sd.b22_singular, std::abs(e.values[0]) < 1e-10 * scale ||
                                   std::any_of(e.values.begin(), e.values.end(),
                                               [&](double v) { return std::abs(v) < 1e-10 * scale; }));
  }
}

TEST(FitRate, Geometric) {
  const auto ms = fit_rate(synthetic(0, 200, [](double k) { return std::pow(2.0, -k); }));
  EXPECT_EQ(ms.kind, MeasuredKind::Linear);
  EXPECT_NEAR(ms.rate, 0.5, 1e-12);
}

TEST(FitRate, HalfPowerLaw) {
  const auto ms = fit_rate(synthetic(1, 10000, [](double k) { return 1 / std::sqrt(k); }));
  EXPECT_EQ(ms.kind, MeasuredKind::PowerLaw);
  EXPECT_NEAR(ms.exponent, -0.5, 1e-9);
  EXPECT_TRUE(is_half_power_law(ms));
  EXPECT_EQ(ms.k_lo, 1000u);
  EXPECT_EQ(ms.k_hi, 10000u);
}

TEST(FitRate, WindowAndShortTrace) {
  EXPECT_THROW(fit_rate(synthetic(0, 50, [](double k) { return std::pow(2.0, -k); })), DomainError);
  FitOptions opt;
  opt.k_min = 100;
  opt.k_max = 500;
  const auto ms = fit_rate(synthetic(1, 1000, [](double k) { return 1 / k; }), opt);
  EXPECT_EQ(ms.k_lo, 100u);
  EXPECT_EQ(ms.k_hi, 500u);
  EXPECT_NEAR(ms.exponent, -1, 1e-9);
  APTrace fixed;
  fixed.status = APStatus::FixedPoint;
  fixed.rows = {{0, 0.1, 0.1}};
  EXPECT_EQ(fit_rate(fixed).kind, MeasuredKind::FiniteTermination);
}

TEST(FitRate, NoisyIsInconclusive) {
  Rng g(421);
  std::uniform_real_distribution<double> u(0.1, 10);
  APTrace tr;
  for (std::size_t k = 1; k <= 300; ++k) tr.rows.push_back({k, u(g), u(g)});
  EXPECT_EQ(fit_rate(tr).kind, MeasuredKind::Inconclusive);
}

TEST(FitRate, CubicRecurrence) {
  APTrace tr;
  double x = 0.5;
  bool positive = true;
  for (std::size_t k = 0; k <= 100000; ++k) {
    tr.rows.push_back({k, x, std::abs(x)});
    positive &= x > 0;
    x = x - 0.1 * x * x * x;
  }
  const auto ms = fit_rate(tr);
  EXPECT_TRUE(positive);
  EXPECT_EQ(ms.kind, MeasuredKind::PowerLaw);
  EXPECT_NEAR(ms.exponent, -0.5, 0.02);
}

TEST(Assess, MixedDegrees) {
  const auto cf = canonicalize_exact(a_e1(4), mixed_degrees_b());
  const auto v = assess(cf, 0.1);
  EXPECT_EQ(v.prediction.predicted, RateClass::SublinearHalf);
  EXPECT_EQ(v.measured.kind, MeasuredKind::Linear);
  EXPECT_NEAR(v.measured.rate, 3.0 / 7.0, 1e-6);
  EXPECT_FALSE(v.agreement);
  EXPECT_FALSE(v.premise_violated);
}

TEST(Assess, Kernel3LinearCase) {
  const auto cf = canonicalize_exact(a_e1(4), kernel3_b(0, 1, 1, 0, 1));
  const auto v = assess(cf, 0.1);
  EXPECT_EQ(v.measured.kind, MeasuredKind::Linear);
  EXPECT_TRUE(v.agreement);
}

TEST(Assess, SegmentIntersectionViolatesPremise) {
  const auto cf = canonicalize_exact(ExactMatrix{{1, 0}, {0, 0}}, ExactMatrix{{-1, 0}, {0, 1}});
  const auto v = assess(cf, 0.5);
  EXPECT_TRUE(v.premise_violated);
  EXPECT_FALSE(v.agreement);
  EXPECT_FALSE(v.note.empty());
}

TEST(TightStart, SignFollowsB22) {
  const auto psd = canonicalize_exact(ExactMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}, ExactMatrix{{0, 0, 1}, {0, 1, 0}, {1, 0, 0}});
  EXPECT_EQ(tight_start_sign(sd_indicator(psd.pencil)), 1.0);
  RunOptions run;
  run.max_iter = 2000;
  const auto t0 = tight_start(psd, run);
  ASSERT_TRUE(t0.has_value());
  EXPECT_GT(*t0, 0);
  const auto nsd = canonicalize_exact(ExactMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}, ExactMatrix{{0, 0, 1}, {0, -1, 0}, {1, 0, 0}});
  EXPECT_EQ(tight_start_sign(sd_indicator(nsd.pencil)), -1.0);
}

TEST(PredictionMeasurement, RankConditionPopulationIsLinear) {
  Rng g(431);
  for (int trial = 0; trial < 12; ++trial) {
    const auto n = static_cast<std::size_t>(integer_in(g, 3, 5));
    const auto m = static_cast<std::size_t>(integer_in(g, 2, static_cast<long>(n) - 1));
    const auto r = static_cast<std::size_t>(integer_in(g, 2, static_cast<long>(m)));
    const auto pc = structured_pencil(g, n, m, r, 0);  // mixed-sign u: B22 indefinite
    const CanonicalForm cf{pc, {}, 0.0, true};
    const auto v = assess(cf, 0.1);
    ASSERT_EQ(v.prediction.predicted, RateClass::Linear);
    ASSERT_EQ(v.measured.kind, MeasuredKind::Linear) << "trial " << trial;
    ASSERT_TRUE(v.agreement);
  }
}

// Near 0 the step is t − c·t³ + O(t⁴) with c = 2 Σ κ² / ‖B‖² over the
// negative degree-2 branches κ·t², so k^{-1/2} behavior sets in only once
// c·t0²·k ≫ 1. The population keeps the instances a 2e5-step run can resolve.
double cubic_constant(const PerturbedPencil& pc) {
  const auto poly = expand_charpoly(pc);
  const auto d = build_diagram(poly);
  double s = 0;
  for (const auto& lt : leading_terms(d, poly))
    if (lt.degree == 2)
      for (const auto& c : lt.coefficients)
        if (c.value < 0) s += c.multiplicity * c.value * c.value;
  const double b = FloatSymMatrix::from_exact(pc.B()).frobenius();
  return 2 * s / (b * b);
}

TEST(PredictionMeasurement, TightPopulationIsHalfPowerLaw) {
  Rng g(433);
  int kept = 0;
  for (int trial = 0; trial < 400 && kept < 6; ++trial) {
    const auto n = static_cast<std::size_t>(integer_in(g, 3, 4));
    const auto m = static_cast<std::size_t>(integer_in(g, 2, static_cast<long>(n) - 1));
    const auto r = static_cast<std::size_t>(integer_in(g, 1, static_cast<long>(m) - 1));
    const int sign = trial % 2 ? -1 : 1;
    const auto pc = structured_pencil(g, n, m, r, 1, sign, -1, 1);
    const auto pred = classify(pc);
    ASSERT_EQ(pred.predicted, RateClass::SublinearHalf);
    ASSERT_TRUE(pred.tight);
    if (cubic_constant(pc) < 0.1) continue;
    ++kept;
    const CanonicalForm cf{pc, {}, 0.0, true};
    RunOptions run;
    run.max_iter = 200000;
    run.tol = 1e-300;
    const auto t0 = tight_start(cf, run);
    ASSERT_TRUE(t0.has_value()) << "trial " << trial;
    EXPECT_EQ(*t0 > 0, sign > 0);
    const auto v = assess(cf, *t0, run);
    EXPECT_TRUE(v.agreement) << "trial " << trial << " exponent " << v.measured.exponent << " ci " << v.measured.ci;
  }
  EXPECT_EQ(kept, 6);
}
