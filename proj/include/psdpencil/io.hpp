#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psdpencil/analysis.hpp"
#include "psdpencil/charpoly.hpp"
#include "psdpencil/errors.hpp"
#include "psdpencil/exact_linalg.hpp"
#include "psdpencil/newton_diagram.hpp"
#include "psdpencil/rational.hpp"

namespace psdpencil {

using Json = nlohmann::ordered_json;

inline Rational rational_from_json(const Json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(Integer(v.dump(), 10));
    if (v.is_number_float()) return parse_rational(v.dump());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected an integer, a decimal or a \"p/q\" string");
}

/// {"rows": r, "cols": c, "data": [[...], ...]}
inline ExactMatrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected a matrix object");
  for (const char* key : {"rows", "cols", "data"})
    if (!j.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
  if (!j["rows"].is_number_unsigned() && !j["rows"].is_number_integer()) throw ParseError(where + ".rows: expected a count");
  if (!j["cols"].is_number_unsigned() && !j["cols"].is_number_integer()) throw ParseError(where + ".cols: expected a count");
  const long rows = j["rows"].get<long>(), cols = j["cols"].get<long>();
  if (rows < 0 || cols < 0) throw ParseError(where + ": negative dimension");
  const auto& data = j["data"];
  if (!data.is_array() || static_cast<long>(data.size()) != rows)
    throw ParseError(where + ".data: expected " + std::to_string(rows) + " rows");
  ExactMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (long i = 0; i < rows; ++i) {
    const auto& row = data[static_cast<std::size_t>(i)];
    const std::string rw = where + ".data[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<long>(row.size()) != cols)
      throw ParseError(rw + ": expected " + std::to_string(cols) + " entries");
    for (long k = 0; k < cols; ++k)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
          rational_from_json(row[static_cast<std::size_t>(k)], rw + "[" + std::to_string(k) + "]");
  }
  return m;
}

inline Json matrix_to_json(const ExactMatrix& m) {
  Json data = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) {
      const Rational& v = m(i, k);
      if (v.get_den() == 1 && v.get_num().fits_slong_p()) row.push_back(v.get_num().get_si());
      else row.push_back(to_string(v));
    }
    data.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

struct PencilInput {
  ExactMatrix A;
  ExactMatrix B;
};

/// {"A": matrix, "B": matrix}
inline PencilInput input_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("input: expected an object with fields \"A\" and \"B\"");
  for (const char* key : {"A", "B"})
    if (!j.contains(key)) throw ParseError(std::string("input: missing field \"") + key + "\"");
  PencilInput in{matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B")};
  if (!in.A.is_square()) throw DimensionError("A: matrix is not square");
  if (!in.B.is_square()) throw DimensionError("B: matrix is not square");
  if (in.A.rows() != in.B.rows()) throw DimensionError("A and B differ in size");
  if (in.A.rows() == 0) throw DimensionError("A: empty matrix");
  if (!in.A.is_symmetric()) throw ContractError("A: matrix is not symmetric");
  if (!in.B.is_symmetric()) throw ContractError("B: matrix is not symmetric");
  return in;
}

inline PencilInput read_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path + ": cannot open file");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return input_from_json(j);
}

inline Json input_to_json(const ExactMatrix& a, const ExactMatrix& b) {
  return Json{{"A", matrix_to_json(a)}, {"B", matrix_to_json(b)}};
}

/// Terms sorted by x-degree descending, then t-degree ascending.
inline Json poly_to_json(const BivariatePoly& p) {
  std::vector<std::pair<Exponent, Rational>> terms(p.terms().begin(), p.terms().end());
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    return a.first.x != b.first.x ? a.first.x > b.first.x : a.first.t < b.first.t;
  });
  Json out = Json::array();
  for (const auto& [e, c] : terms) out.push_back(Json{{"t", e.t}, {"x", e.x}, {"c", to_string(c)}});
  return out;
}

inline Json unipoly_to_json(const UniPoly& p) {
  Json out = Json::array();
  for (const auto& c : p.coeffs()) out.push_back(to_string(c));
  return out;
}

inline Json edge_report_to_json(const EdgeCoefficientReport& r) {
  return Json{{"gamma", {r.gamma.t, r.gamma.x}},
              {"edge", to_string(r.edge_tag)},
              {"formula", to_string(r.formula_value)},
              {"expansion", to_string(r.expansion_value)},
              {"agrees", r.agrees()}};
}

inline Json diagram_to_json(const NewtonDiagram& d, const BivariatePoly& poly, const std::vector<LeadingTerm>& lts) {
  Json verts = Json::array();
  for (const auto& v : d.vertices) verts.push_back({v.x, v.y});
  Json edges = Json::array();
  for (std::size_t e = 0; e < d.edges.size(); ++e) {
    const auto& ed = d.edges[e];
    const auto& lt = lts.at(e);
    Json coeffs = Json::array();
    for (const auto& c : lt.coefficients)
      coeffs.push_back(Json{{"value", c.value}, {"error", c.error}, {"multiplicity", c.multiplicity}});
    edges.push_back(Json{{"start", {ed.start.x, ed.start.y}},
                         {"end", {ed.end.x, ed.end.y}},
                         {"slope", to_string(ed.slope)},
                         {"mult", ed.multiplicity},
                         {"extension", ed.extension},
                         {"f_gamma", unipoly_to_json(edge_polynomial(d, e, poly))},
                         {"leading_coefficients", std::move(coeffs)},
                         {"complex_roots", lt.complex_roots}});
  }
  Json degrees = Json::array();
  for (const auto& lt : lts)
    for (long k = 0; k < lt.count - lt.identically_zero; ++k) degrees.push_back(to_string(lt.degree));
  long zero = 0;
  for (const auto& lt : lts) zero += lt.identically_zero;
  return Json{{"n", d.n}, {"vertices", std::move(verts)}, {"edges", std::move(edges)},
              {"eigenvalue_degrees", std::move(degrees)}, {"identically_zero", zero}};
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json sd_to_json(const SDIndicator& s) {
  return Json{{"b22_semidefiniteness", to_string(s.b22_semidefiniteness)},
              {"b22_singular", s.b22_singular},
              {"rank_gap", s.rank_gap},
              {"conclusions", s.conclusions}};
}

inline Json prediction_to_json(const Prediction& p) {
  return Json{{"predicted", to_string(p.predicted)},
              {"predicted_reason", p.reason},
              {"tight", p.tight},
              {"max_slope", to_string(p.max_slope)},
              {"sd_indicator", sd_to_json(p.sd)}};
}

inline std::string measured_label(const Measurement& m) {
  return to_string(m.kind);
}

inline Json verdict_to_json(const RateVerdict& v) {
  Json j{{"predicted", to_string(v.prediction.predicted)},
         {"predicted_reason", v.prediction.reason},
         {"measured", v.premise_violated ? std::string("premise violated") : measured_label(v.measured)},
         {"exponent", number_or_null(v.measured.exponent)},
         {"ci", number_or_null(v.measured.ci)},
         {"agreement", v.agreement},
         {"rate", number_or_null(v.measured.rate)},
         {"tight", v.prediction.tight},
         {"fit_window", {v.measured.k_lo, v.measured.k_hi}}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace psdpencil
