#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "psdpencil/charpoly.hpp"
#include "psdpencil/errors.hpp"
#include "psdpencil/newton_diagram.hpp"
#include "psdpencil/projections.hpp"
#include "psdpencil/rational.hpp"

namespace psdpencil {

// ---------------------------------------------------------------------------
// Canonical form

/// The exact pencil in canonical coordinates together with the orthogonal
/// change of basis (q is row-major n×n; its columns are the new basis) and the
/// largest absolute rounding error introduced when rationalizing. For exact
/// diagonal input q is a permutation and residual = 0.
struct CanonicalForm {
  PerturbedPencil pencil;
  std::vector<double> q;
  double residual = 0;
  bool exact = false;

  LinePencil line() const { return LinePencil(FloatSymMatrix::from_exact(pencil.A()), FloatSymMatrix::from_exact(pencil.B())); }
};

inline constexpr std::uint64_t kCanonicalMaxDen = 1000000;
inline constexpr double kZeroEigenvalue = 1e-10;

/// Float canonicalization. Eigenvalues of A ≥ 1e-10 (relative to max(1,‖A‖))
/// become p_1 ≥ … ≥ p_{n−m}; smaller ones define the kernel. The kernel basis
/// is rotated to diagonalize B22, so exact rank tests after rounding see clean
/// zeros. Entries are rounded to rationals with denominator ≤ 1e6.
inline CanonicalForm canonicalize(const FloatSymMatrix& a, const FloatSymMatrix& b) {
  const std::size_t n = a.n();
  if (b.n() != n) throw DimensionError("canonicalize: A and B differ in size");
  const double scale = std::max(1.0, a.frobenius());
  const auto ea = eigh(a);
  if (n > 0 && ea.values.front() < -kZeroEigenvalue * scale)
    throw DomainError("canonicalize: A is not PSD (min eigenvalue " + std::to_string(ea.values.front()) + ")");

  std::vector<std::vector<double>> pos, ker;
  std::vector<double> pvals;
  for (std::size_t k = n; k-- > 0;) {
    if (ea.values[k] >= kZeroEigenvalue * scale) {
      pos.push_back(ea.vectors[k]);
      pvals.push_back(ea.values[k]);
    } else {
      ker.push_back(ea.vectors[k]);
    }
  }
  const std::size_t m = ker.size();
  if (m > 0) {
    FloatSymMatrix b22(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0;
        for (std::size_t x = 0; x < n; ++x)
          for (std::size_t y = 0; y < n; ++y) s += ker[i][x] * b(x, y) * ker[j][y];
        b22(i, j) = s;
      }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) b22(i, j) = b22(j, i) = 0.5 * (b22(i, j) + b22(j, i));
    const auto e22 = eigh(b22);
    std::vector<std::vector<double>> rotated;
    for (std::size_t k = m; k-- > 0;) {
      std::vector<double> v(n, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t x = 0; x < n; ++x) v[x] += e22.vectors[k][i] * ker[i][x];
      rotated.push_back(std::move(v));
    }
    ker = std::move(rotated);
  }

  std::vector<std::vector<double>> basis = pos;
  basis.insert(basis.end(), ker.begin(), ker.end());
  CanonicalForm out{PerturbedPencil({}, ExactMatrix(n, n)), std::vector<double>(n * n), 0.0, false};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.q[i * n + j] = basis[j][i];

  std::vector<Rational> p;
  for (double v : pvals) {
    Rational r = rationalize(v, kCanonicalMaxDen);
    if (r <= 0) r = Rational(1, static_cast<unsigned long>(kCanonicalMaxDen));
    out.residual = std::max(out.residual, std::abs(r.get_d() - v));
    p.push_back(r);
  }
  ExactMatrix bq(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0;
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) s += basis[i][x] * b(x, y) * basis[j][y];
      Rational r = rationalize(s, kCanonicalMaxDen);
      out.residual = std::max(out.residual, std::abs(r.get_d() - s));
      bq(i, j) = bq(j, i) = r;
    }
  out.pencil = PerturbedPencil(std::move(p), std::move(bq));
  return out;
}

/// Exact input. A diagonal A with nonnegative entries is permuted exactly
/// (positive entries first, original order kept); any other A goes through
/// the float path.
inline CanonicalForm canonicalize_exact(const ExactMatrix& a, const ExactMatrix& b) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
    throw DimensionError("canonicalize: A and B must be square of equal size");
  if (!a.is_symmetric()) throw DomainError("canonicalize: A is not symmetric");
  if (!b.is_symmetric()) throw ContractError("canonicalize: B is not symmetric");
  const std::size_t n = a.rows();
  if (!a.is_diagonal()) return canonicalize(FloatSymMatrix::from_exact(a), FloatSymMatrix::from_exact(b));
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (a(i, i) < 0) throw DomainError("canonicalize: A is not PSD (diagonal entry " + std::to_string(i + 1) + " < 0)");
    if (a(i, i) > 0) order.push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (a(i, i) == 0) order.push_back(i);
  std::vector<Rational> p;
  for (auto i : order)
    if (a(i, i) > 0) p.push_back(a(i, i));
  ExactMatrix bp(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) bp(i, j) = b(order[i], order[j]);
  std::vector<double> q(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) q[order[j] * n + j] = 1;
  return CanonicalForm{PerturbedPencil(std::move(p), std::move(bp)), std::move(q), 0.0, true};
}

// ---------------------------------------------------------------------------
// A-priori indicators

enum class Semidefiniteness { PositiveSemidefinite, NegativeSemidefinite, Indefinite, Zero };

inline const char* to_string(Semidefiniteness s) {
  switch (s) {
    case Semidefiniteness::PositiveSemidefinite: return "positive_semidefinite";
    case Semidefiniteness::NegativeSemidefinite: return "negative_semidefinite";
    case Semidefiniteness::Indefinite: return "indefinite";
    case Semidefiniteness::Zero: return "zero";
  }
  return "?";
}

struct SDIndicator {
  Semidefiniteness b22_semidefiniteness = Semidefiniteness::Zero;
  bool b22_singular = false;
  long rank_gap = 0;
  std::vector<std::string> conclusions;
};

/// Inertia of B22 comes from the signs of u in B22 = Σ u_k c_k c_kᵀ (the
/// c_k are independent, so Sylvester's law applies).
inline SDIndicator sd_indicator(const PerturbedPencil& pc) {
  SDIndicator s;
  const std::size_t r = pc.r();
  std::size_t plus = 0;
  for (const auto& u : pc.u()) plus += u > 0;
  if (r == 0) s.b22_semidefiniteness = Semidefiniteness::Zero;
  else if (plus == r) s.b22_semidefiniteness = Semidefiniteness::PositiveSemidefinite;
  else if (plus == 0) s.b22_semidefiniteness = Semidefiniteness::NegativeSemidefinite;
  else s.b22_semidefiniteness = Semidefiniteness::Indefinite;
  s.b22_singular = r < pc.m();
  s.rank_gap = pc.m() == 0 ? 0 : static_cast<long>(rank(pc.bottom_rows())) - static_cast<long>(r);

  const bool semidef = s.b22_semidefiniteness == Semidefiniteness::PositiveSemidefinite ||
                       s.b22_semidefiniteness == Semidefiniteness::NegativeSemidefinite;
  if (pc.m() == 0) {
    s.conclusions.push_back("A is nonsingular: E meets the interior of the PSD cone");
    return s;
  }
  if (s.b22_semidefiniteness == Semidefiniteness::Indefinite)
    s.conclusions.push_back("B22 indefinite: singularity degree <= 1 if E meets the cone only at A");
  else if (!s.b22_singular)
    s.conclusions.push_back("B22 nonsingular: singularity degree <= 1 if E meets the cone only at A");
  if (s.b22_semidefiniteness == Semidefiniteness::Zero)
    s.conclusions.push_back("B22 = 0: singularity degree <= 1 if E meets the cone only at A");
  if (semidef && s.rank_gap == 0)
    s.conclusions.push_back("B22 semidefinite with rank[B21 B22] = rank B22: E meets the cone in more than one point");
  if (semidef && s.b22_singular && s.rank_gap > 0)
    s.conclusions.push_back("B22 nonzero semidefinite singular with rank gap > 0: tight O(k^-1/2) from a suitable start");
  return s;
}

enum class RateClass { Linear, SublinearHalf, Unknown };

inline const char* to_string(RateClass c) {
  switch (c) {
    case RateClass::Linear: return "linear";
    case RateClass::SublinearHalf: return "sublinear_half";
    case RateClass::Unknown: return "unknown";
  }
  return "?";
}

struct Prediction {
  RateClass predicted = RateClass::Unknown;
  std::string reason;
  /// Hypotheses for a Θ(k^{-1/2}) lower bound hold.
  bool tight = false;
  SDIndicator sd;
  Rational max_slope;
};

/// Linear when A is nonsingular, when rank[B21 B22] = rank B22, or when every
/// Newton-diagram slope is ≤ 1; otherwise O(k^{-1/2}) as an upper bound.
inline Prediction classify(const PerturbedPencil& pc) {
  Prediction pr;
  pr.sd = sd_indicator(pc);
  if (pc.full_rank()) {
    pr.predicted = RateClass::Linear;
    pr.reason = "full rank: A is nonsingular";
    return pr;
  }
  const auto poly = expand_charpoly(pc);
  const auto diagram = build_diagram(poly);
  for (const auto& e : diagram.edges) pr.max_slope = std::max(pr.max_slope, e.slope);
  const bool semidef = pr.sd.b22_semidefiniteness == Semidefiniteness::PositiveSemidefinite ||
                       pr.sd.b22_semidefiniteness == Semidefiniteness::NegativeSemidefinite;
  if (pr.sd.rank_gap == 0) {
    pr.predicted = RateClass::Linear;
    pr.reason = "rank condition: rank[B21 B22] = rank B22";
  } else if (pr.max_slope <= 1) {
    pr.predicted = RateClass::Linear;
    pr.reason = "Newton diagram: all slopes <= 1";
  } else {
    pr.predicted = RateClass::SublinearHalf;
    pr.reason = "rank[B21 B22] > rank B22: O(k^-1/2) upper bound";
    pr.tight = semidef && pr.sd.b22_singular;
    if (pr.tight) pr.reason += "; tight (B22 nonzero semidefinite singular)";
  }
  return pr;
}

/// Sign of t0 for which the tight rate is attained: + for PSD B22, − for NSD.
inline double tight_start_sign(const SDIndicator& sd) {
  return sd.b22_semidefiniteness == Semidefiniteness::NegativeSemidefinite ? -1.0 : 1.0;
}

// ---------------------------------------------------------------------------
// Empirical rate

enum class MeasuredKind { Linear, PowerLaw, FiniteTermination, Inconclusive };

inline const char* to_string(MeasuredKind k) {
  switch (k) {
    case MeasuredKind::Linear: return "linear";
    case MeasuredKind::PowerLaw: return "power_law";
    case MeasuredKind::FiniteTermination: return "finite_termination";
    case MeasuredKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Measurement {
  MeasuredKind kind = MeasuredKind::Inconclusive;
  double rate = std::nan("");      // ρ for linear
  double exponent = std::nan("");  // least-squares slope of log err vs log k
  double ci = std::nan("");        // 95% half-width of the slope
  double ratio_spread = std::nan("");
  std::size_t k_lo = 0, k_hi = 0;  // power-law fit window
};

struct FitOptions {
  /// Restricts the power-law fit to k in [k_min, k_max]; when unset the
  /// window is the last decade of the trace.
  std::optional<std::size_t> k_min;
  std::optional<std::size_t> k_max;
};

inline constexpr std::size_t kMinTraceLength = 100;

/// (a) Linear: over the last quartile, the ratios ρ_k = err_{k+1}/err_k must
/// satisfy std/mean < 0.05 with mean in (0, 1), and the gaps 1 − ρ_k must be
/// equally concentrated, which rules out sublinear traces whose ratios drift
/// toward 1. (b) Power law: least-squares slope s of log err against log k,
/// classified when the 95% interval has width < 0.1. Otherwise inconclusive.
inline Measurement fit_rate(const APTrace& tr, const FitOptions& opt = {}) {
  Measurement ms;
  if (tr.status == APStatus::FixedPoint || (!tr.rows.empty() && tr.rows.back().err == 0)) {
    ms.kind = MeasuredKind::FiniteTermination;
    return ms;
  }
  if (tr.rows.size() < kMinTraceLength)
    throw DomainError("fit_rate: trace has " + std::to_string(tr.rows.size()) + " rows, need at least " +
                      std::to_string(kMinTraceLength));
  const auto& rows = tr.rows;

  {
    const std::size_t first = rows.size() - rows.size() / 4;
    std::vector<double> ratio, gap;
    for (std::size_t i = std::max<std::size_t>(first, 1); i < rows.size(); ++i) {
      if (rows[i - 1].err <= 0) continue;
      ratio.push_back(rows[i].err / rows[i - 1].err);
      gap.push_back(1 - ratio.back());
    }
    auto mean_std = [](const std::vector<double>& v) {
      const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0;
      for (double x : v) ss += (x - mu) * (x - mu);
      return std::pair{mu, std::sqrt(ss / static_cast<double>(v.size()))};
    };
    if (ratio.size() >= 2) {
      const auto [mu, sd] = mean_std(ratio);
      const auto [gmu, gsd] = mean_std(gap);
      ms.ratio_spread = sd / mu;
      if (mu > 0 && mu < 1 && sd / mu < 0.05 && gmu > 0 && gsd / gmu < 0.05) {
        ms.kind = MeasuredKind::Linear;
        ms.rate = mu;
      }
    }
  }

  std::size_t hi = opt.k_max.value_or(rows.back().k);
  hi = std::min(hi, rows.back().k);
  std::size_t lo = opt.k_min.value_or(std::max<std::size_t>(1, hi / 10));
  lo = std::max<std::size_t>(lo, 1);
  std::vector<double> xs, ys;
  for (const auto& r : rows)
    if (r.k >= lo && r.k <= hi && r.err > 0) {
      xs.push_back(std::log(static_cast<double>(r.k)));
      ys.push_back(std::log(r.err));
    }
  ms.k_lo = lo;
  ms.k_hi = hi;
  if (xs.size() >= 3) {
    const double nn = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / nn;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / nn;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0) {
      const double slope = sxy / sxx;
      double ssr = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - (my + slope * (xs[i] - mx));
        ssr += res * res;
      }
      ms.exponent = slope;
      ms.ci = 1.96 * std::sqrt(ssr / (nn - 2) / sxx);
      if (ms.kind != MeasuredKind::Linear && 2 * ms.ci < 0.1) ms.kind = MeasuredKind::PowerLaw;
    }
  }
  return ms;
}

inline bool is_half_power_law(const Measurement& ms) {
  return ms.kind == MeasuredKind::PowerLaw && std::abs(ms.exponent + 0.5) <= 0.05;
}

// ---------------------------------------------------------------------------
// Drivers

struct Experiment {
  APTrace trace;
  /// Trace used for fitting; differs from `trace` when the run converged in
  /// fewer than 100 steps and was repeated with tol = 1e-100.
  APTrace measured_trace;
  Measurement measurement;
};

inline constexpr double kMeasurementTol = 1e-100;

inline Experiment run_experiment(const LinePencil& line, double t0, const RunOptions& run = {}, const FitOptions& fit = {}) {
  Experiment ex;
  ex.trace = run_ap(line, t0, run);
  ex.measured_trace = ex.trace;
  if (ex.trace.status == APStatus::Converged && ex.trace.rows.size() < kMinTraceLength && run.tol > kMeasurementTol) {
    RunOptions longer = run;
    longer.tol = kMeasurementTol;
    ex.measured_trace = run_ap(line, t0, longer);
  }
  if (ex.measured_trace.status != APStatus::FixedPoint && ex.measured_trace.rows.size() < kMinTraceLength) {
    ex.measurement.kind = MeasuredKind::Inconclusive;
    return ex;
  }
  ex.measurement = fit_rate(ex.measured_trace, fit);
  return ex;
}

struct RateVerdict {
  Prediction prediction;
  Measurement measured;
  bool agreement = false;
  bool premise_violated = false;
  std::string note;
};

inline bool agrees(const Prediction& p, const Measurement& m) {
  switch (p.predicted) {
    case RateClass::Linear: return m.kind == MeasuredKind::Linear;
    case RateClass::SublinearHalf: return is_half_power_law(m);
    case RateClass::Unknown: return false;
  }
  return false;
}

/// classify + run + fit. Divergence, or a fixed point reached from t0 ≠ 0,
/// means E meets the cone in more than A, so the rate premise is void.
inline RateVerdict assess(const CanonicalForm& cf, double t0, const RunOptions& run = {}, const FitOptions& fit = {},
                          Experiment* out = nullptr) {
  RateVerdict v;
  v.prediction = classify(cf.pencil);
  try {
    Experiment ex = run_experiment(cf.line(), t0, run, fit);
    v.measured = ex.measurement;
    if (out) *out = std::move(ex);
  } catch (const DivergenceError& e) {
    v.premise_violated = true;
    v.note = std::string("premise violated: ") + e.what();
    return v;
  }
  if (v.measured.kind == MeasuredKind::FiniteTermination) {
    v.premise_violated = true;
    v.note = "premise violated: phi(t) is PSD at a point t != 0 of the trace";
  }
  v.agreement = !v.premise_violated && agrees(v.prediction, v.measured);
  return v;
}

/// Scans t0 = s·10^{-1}, s·10^{-2}, s·10^{-3} (s from tight_start_sign) and
/// returns the first start whose trace is monotone in |t_k|.
inline std::optional<double> tight_start(const CanonicalForm& cf, const RunOptions& run = {}) {
  const double s = tight_start_sign(sd_indicator(cf.pencil));
  const auto line = cf.line();
  for (double mag : {1e-1, 1e-2, 1e-3}) {
    const double t0 = s * mag;
    APTrace tr;
    try {
      tr = run_ap(line, t0, run);
    } catch (const NumericalError&) {
      continue;
    }
    bool monotone = true;
    for (std::size_t i = 1; i < tr.rows.size() && monotone; ++i)
      monotone = std::abs(tr.rows[i].t) <= std::abs(tr.rows[i - 1].t) && tr.rows[i].t * t0 > 0;
    if (monotone) return t0;
  }
  return std::nullopt;
}

}  // namespace psdpencil
