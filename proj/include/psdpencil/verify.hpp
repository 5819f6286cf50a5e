#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "psdpencil/charpoly.hpp"
#include "psdpencil/io.hpp"
#include "psdpencil/newton_diagram.hpp"
#include "psdpencil/projections.hpp"
#include "psdpencil/random.hpp"

namespace psdpencil {

/// adj_k with every entry negated for 0 < k < n: the test-harness mutant.
inline LabeledMatrix mutant_adjugate(const ExactMatrix& a, long k) {
  LabeledMatrix out = adjugate_k(a, k);
  if (k > 0 && static_cast<std::size_t>(k) < a.rows()) out.body = Rational(-1) * out.body;
  return out;
}

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::size_t n_max = 5;
  std::size_t trials = 100;
  bool mutant = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Violation {
  std::size_t trial = 0;
  std::string check;
  std::string message;
  Json instance;
};

struct VerifyReport {
  std::map<std::string, std::size_t> passed;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail {

struct TrialOutcome {
  std::vector<std::string> passed;
  std::optional<Violation> violation;
};

inline TrialOutcome verify_trial(const VerifyOptions& opt, std::size_t trial) {
  TrialOutcome out;
  Rng g(opt.seed * 0x9E3779B97F4A7C15ULL + trial);
  const AdjugateFn adj = opt.mutant ? AdjugateFn(mutant_adjugate) : AdjugateFn(adjugate_k);
  auto fail = [&](const std::string& check, const std::string& msg, const ExactMatrix& a, const ExactMatrix& b) {
    out.violation = Violation{trial, check, msg, input_to_json(a, b)};
  };

  PerturbedPencil pc = random_pencil(g, opt.n_max);
  const BivariatePoly poly = expand_charpoly(pc, adj);

  if (poly != brute_force_charpoly(pc.A(), pc.B()))
    return fail("oracle_equivalence", "structured expansion differs from det(xI - A - tB)", pc.A(), pc.B()), out;
  out.passed.push_back("oracle_equivalence");

  for (const auto& [e, c] : poly.terms())
    if (!in_D0(e, pc.n(), pc.m()))
      return fail("support_in_D0", "term t^" + std::to_string(e.t) + " x^" + std::to_string(e.x) + " outside D0",
                  pc.A(), pc.B()),
             out;
  out.passed.push_back("support_in_D0");

  for (const auto& [gamma, tag] : edge_case_points(pc)) {
    const auto rep = edge_coefficient(pc, poly, gamma);
    if (!rep.agrees() || (tag == EdgeTag::BelowE3 && poly.contains(gamma)))
      return fail("edge_coefficients",
                  std::string(to_string(tag)) + " gamma = (" + std::to_string(gamma.t) + ", " + std::to_string(gamma.x) +
                      "): formula " + to_string(rep.formula_value) + " vs expansion " + to_string(rep.expansion_value),
                  pc.A(), pc.B()),
             out;
  }
  out.passed.push_back("edge_coefficients");

  try {
    const auto d = build_diagram(poly);
    for (const auto& e : d.edges)
      if (e.slope > 2)
        return fail("slope_bound", "Newton diagram slope " + to_string(e.slope) + " > 2", pc.A(), pc.B()), out;
  } catch (const ContractError& e) {
    return fail("slope_bound", e.what(), pc.A(), pc.B()), out;
  }
  out.passed.push_back("slope_bound");

  if (opt.n_max >= 3) {
    const bool fires = trial % 2 == 0;
    auto sp = cascade_pencil(g, std::min<std::size_t>(opt.n_max, 6), fires);
    try {
      const auto res = degeneracy_cascade(sp.pencil, expand_charpoly(sp.pencil, adj), sp.mu_tilde);
      if (res.fires != fires)
        return fail("degeneracy_cascade", "constructed rank condition not reflected", sp.pencil.A(), sp.pencil.B()), out;
    } catch (const InvariantViolation& e) {
      return fail("degeneracy_cascade", e.what(), sp.pencil.A(), sp.pencil.B()), out;
    }
    out.passed.push_back("degeneracy_cascade");
  }

  if (!pc.B().is_zero()) {
    const LinePencil line(FloatSymMatrix::from_exact(pc.A()), FloatSymMatrix::from_exact(pc.B()));
    const double t = static_cast<double>(integer_in(g, -500000, 500000)) / 1e6;
    const double s = ap_step_scalar(t, line), mtx = ap_step_matrix(t, line);
    if (std::abs(s - mtx) > 1e-11)
      return fail("dual_path", "scalar and matrix AP steps differ by " + std::to_string(std::abs(s - mtx)) +
                                   " at t = " + std::to_string(t),
                  pc.A(), pc.B()),
             out;
    out.passed.push_back("dual_path");
  }
  return out;
}

}  // namespace detail

/// Runs the invariant suite on `trials` seeded random instances. Each trial
/// draws from its own engine, so the report does not depend on scheduling.
inline VerifyReport verify_suite(const VerifyOptions& opt) {
  if (opt.n_max < 1 || opt.n_max > 6) throw DomainError("verify: nmax must lie in [1, 6]");
  std::vector<detail::TrialOutcome> outcomes(opt.trials);
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(opt.trials, 1)));
  auto work = [&](unsigned tid) {
    for (std::size_t i = tid; i < opt.trials; i += threads) outcomes[i] = detail::verify_trial(opt, i);
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  VerifyReport rep;
  for (auto& o : outcomes) {
    for (const auto& name : o.passed) ++rep.passed[name];
    if (o.violation) rep.violations.push_back(std::move(*o.violation));
  }
  return rep;
}

inline Json report_to_json(const VerifyOptions& opt, const VerifyReport& rep) {
  Json passed = Json::object();
  for (const auto& [k, v] : rep.passed) passed[k] = v;
  Json viol = Json::array();
  for (const auto& v : rep.violations)
    viol.push_back(Json{{"trial", v.trial}, {"check", v.check}, {"message", v.message}, {"instance", v.instance}});
  return Json{{"seed", opt.seed},        {"nmax", opt.n_max},       {"trials", opt.trials},
              {"status", rep.ok() ? "ok" : "violation"}, {"passed", std::move(passed)}, {"violations", std::move(viol)}};
}

}  // namespace psdpencil
