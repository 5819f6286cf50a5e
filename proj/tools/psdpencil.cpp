// psdpencil: expand, diagram, iterate, classify and verify perturbed PSD pencils.
//
// Exit codes: 0 ok, 1 usage, 2 input error, 3 invariant violation,
// 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "psdpencil/analysis.hpp"
#include "psdpencil/charpoly.hpp"
#include "psdpencil/io.hpp"
#include "psdpencil/newton_diagram.hpp"
#include "psdpencil/verify.hpp"

namespace {

using namespace psdpencil;

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kInvariant = 3, kNumerical = 4 };

void emit(const Json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ParseError(out_path + ": cannot open for writing");
  f << text;
}

CanonicalForm load(const std::string& path) {
  const auto in = read_input(path);
  return canonicalize_exact(in.A, in.B);
}

Json canonical_info(const CanonicalForm& cf) {
  return Json{{"n", cf.pencil.n()}, {"m", cf.pencil.m()}, {"r", cf.pencil.r()},
              {"exact", cf.exact}, {"rounding_residual", cf.residual}};
}

int cmd_expand(const std::string& in, const std::string& out) {
  const auto cf = load(in);
  const auto poly = expand_charpoly(cf.pencil);
  Json report = Json::array();
  for (const auto& [gamma, tag] : edge_case_points(cf.pencil)) {
    const auto rep = edge_coefficient(cf.pencil, poly, gamma);
    if (!rep.agrees())
      throw InvariantViolation("edge coefficient check failed at gamma = (" + std::to_string(gamma.t) + ", " +
                               std::to_string(gamma.x) + ")");
    report.push_back(edge_report_to_json(rep));
  }
  emit(Json{{"pencil", canonical_info(cf)}, {"poly", poly_to_json(poly)}, {"edge_coefficients", report}}, out);
  return kOk;
}

int cmd_diagram(const std::string& in, const std::string& out) {
  const auto cf = load(in);
  const auto poly = expand_charpoly(cf.pencil);
  const auto d = build_diagram(poly);
  const auto lts = leading_terms(d, poly, true);
  emit(Json{{"pencil", canonical_info(cf)}, {"diagram", diagram_to_json(d, poly, lts)}}, out);
  return kOk;
}

int cmd_iterate(const std::string& in, double t0, const RunOptions& run, const std::string& out) {
  const auto cf = load(in);
  Experiment ex;
  const RateVerdict v = assess(cf, t0, run, {}, &ex);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw ParseError(out + ": cannot open for writing");
    write_trace_csv(f, ex.trace);
  }
  Json j = verdict_to_json(v);
  j["iterations"] = ex.trace.rows.empty() ? 0 : ex.trace.rows.back().k;
  j["status"] = v.premise_violated && ex.trace.rows.empty() ? "diverged" : to_string(ex.trace.status);
  j["path"] = to_string(run.path);
  emit(j, "");
  return kOk;
}

int cmd_classify(const std::string& in) {
  const auto cf = load(in);
  Json j = prediction_to_json(classify(cf.pencil));
  j["pencil"] = canonical_info(cf);
  emit(j, "");
  return kOk;
}

int cmd_verify(const VerifyOptions& opt) {
  const auto rep = verify_suite(opt);
  const Json j = report_to_json(opt, rep);
  if (!rep.ok()) {
    std::cerr << j.dump(2) << "\n";
    return kInvariant;
  }
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic-polynomial, Newton-diagram and alternating-projection analysis of A + tB"};
  app.require_subcommand(1);

  std::string in, out;
  auto* expand = app.add_subcommand("expand", "exact expansion of det(xI - A - tB) with edge-coefficient report");
  expand->add_option("input", in, "instance JSON {\"A\":..., \"B\":...}")->required();
  expand->add_option("-o,--output", out, "output file (default stdout)");

  auto* diagram = app.add_subcommand("diagram", "Newton diagram and eigenvalue leading terms");
  diagram->add_option("input", in, "instance JSON")->required();
  diagram->add_option("-o,--output", out, "output file (default stdout)");

  double t0 = 0;
  RunOptions run;
  std::string path_name = "scalar";
  auto* iterate = app.add_subcommand("iterate", "run alternating projections and report the rate verdict");
  iterate->add_option("input", in, "instance JSON")->required();
  iterate->add_option("--t0", t0, "starting parameter (U_0 = A + t0 B), nonzero")->required();
  iterate->add_option("--max-iter", run.max_iter, "iteration cap")->capture_default_str();
  iterate->add_option("--tol", run.tol, "stop when |t_k| < tol")->capture_default_str();
  iterate->add_option("--path", path_name, "scalar | matrix")->check(CLI::IsMember({"scalar", "matrix"}))->capture_default_str();
  iterate->add_option("-o,--output", out, "trace CSV file (k,t_k,err_k)");

  auto* classify_cmd = app.add_subcommand("classify", "a-priori rate classification and indicators");
  classify_cmd->add_option("input", in, "instance JSON")->required();

  VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "run the invariant suite on seeded random instances");
  verify->add_option("--seed", vopt.seed, "random seed")->capture_default_str();
  verify->add_option("--nmax", vopt.n_max, "largest matrix size (<= 6)")->capture_default_str();
  verify->add_option("--trials", vopt.trials, "number of random instances")->capture_default_str();
  verify->add_flag("--mutant", vopt.mutant, "corrupt adj_k signs (harness self-check)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*expand) return cmd_expand(in, out);
    if (*diagram) return cmd_diagram(in, out);
    if (*iterate) {
      if (t0 == 0) {
        std::cerr << "iterate: --t0 must be nonzero\n";
        return kUsage;
      }
      if (run.max_iter < 1) {
        std::cerr << "iterate: --max-iter must be at least 1\n";
        return kUsage;
      }
      run.path = path_name == "matrix" ? APPath::Matrix : APPath::Scalar;
      return cmd_iterate(in, t0, run, out);
    }
    if (*classify_cmd) return cmd_classify(in);
    if (*verify) {
      if (vopt.n_max < 1 || vopt.n_max > 6) {
        std::cerr << "verify: --nmax must lie in [1, 6]\n";
        return kUsage;
      }
      return cmd_verify(vopt);
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  }
  return kUsage;
}
