#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "psdpencil/charpoly.hpp"
#include "psdpencil/errors.hpp"
#include "psdpencil/polynomial.hpp"
#include "psdpencil/projections.hpp"
#include "psdpencil/rational.hpp"

namespace psdpencil {

/// A support point after the transform (γ1, γ2) ↦ (X, Y) = (n − γ2, γ1):
/// X counts eigenvalue branches, Y is the t-order.
struct DiagramPoint {
  long x = 0;
  long y = 0;
  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

/// A hull segment from `start` to `end`. The rightmost segment is extended
/// to X = n when p has a factor x^L (L > 0); then `extension` = L and the
/// multiplicity is end.x − start.x + L. A diagram whose support is the single
/// point (0, 0) has one slope-0 segment of zero length with extension n.
struct DiagramEdge {
  DiagramPoint start;
  DiagramPoint end;
  Rational slope;
  long multiplicity = 0;
  long extension = 0;
};

struct NewtonDiagram {
  long n = 0;
  std::vector<DiagramPoint> points;  // sorted by (x, y)
  std::vector<DiagramPoint> vertices;
  std::vector<DiagramEdge> edges;

  /// True if q lies on the closed segment of edge e (extension excluded).
  bool on_edge(std::size_t e, DiagramPoint q) const {
    const auto& ed = edges.at(e);
    if (q.x < ed.start.x || q.x > ed.end.x) return false;
    return Rational(q.y - ed.start.y) == ed.slope * (q.x - ed.start.x);
  }
};

namespace detail {

inline long cross(DiagramPoint o, DiagramPoint a, DiagramPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace detail

/// Lower convex hull of the transformed support (exact monotone chain).
/// Points collinear with a hull segment lie on the edge but are not vertices.
inline NewtonDiagram build_diagram(const BivariatePoly& poly) {
  const long n = poly.x_degree();
  if (n < 0 || poly.coefficient({0, n}) != 1 || poly.x_coefficient(n).degree() != 0)
    throw ContractError("build_diagram: polynomial is not monic in x");
  NewtonDiagram d;
  d.n = n;
  for (const auto& [e, c] : poly.terms()) d.points.push_back({n - e.x, e.t});
  std::sort(d.points.begin(), d.points.end(),
            [](DiagramPoint a, DiagramPoint b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });

  // Only the lowest point in each column can be on the lower hull.
  std::vector<DiagramPoint> lowest;
  for (const auto& p : d.points)
    if (lowest.empty() || lowest.back().x != p.x) lowest.push_back(p);
  std::vector<DiagramPoint> hull;
  for (const auto& p : lowest) {
    while (hull.size() >= 2 && detail::cross(hull[hull.size() - 2], hull.back(), p) <= 0) hull.pop_back();
    hull.push_back(p);
  }
  d.vertices = hull;

  const long tail = n - hull.back().x;
  if (hull.size() == 1) {
    d.edges.push_back({hull[0], hull[0], Rational(0), tail, tail});
    return d;
  }
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    DiagramEdge e;
    e.start = hull[i];
    e.end = hull[i + 1];
    e.slope = Rational(e.end.y - e.start.y, e.end.x - e.start.x);
    e.slope.canonicalize();
    e.multiplicity = e.end.x - e.start.x;
    d.edges.push_back(e);
  }
  d.edges.back().extension = tail;
  d.edges.back().multiplicity += tail;
  return d;
}

/// f_Γ(x) = Σ d_γ x^{γ2} over the support points on edge Γ.
inline UniPoly edge_polynomial(const NewtonDiagram& d, std::size_t edge, const BivariatePoly& poly) {
  if (edge >= d.edges.size())
    throw DomainError("edge_polynomial: edge " + std::to_string(edge) + " not in diagram with " +
                      std::to_string(d.edges.size()) + " edges");
  std::vector<Rational> c(static_cast<std::size_t>(d.n) + 1);
  for (const auto& [e, v] : poly.terms())
    if (d.on_edge(edge, {d.n - e.x, e.t})) c[static_cast<std::size_t>(e.x)] += v;
  return UniPoly(std::move(c));
}

/// The single term of a vertex, d_γ x^{γ2}.
inline UniPoly vertex_polynomial(const NewtonDiagram& d, std::size_t vertex, const BivariatePoly& poly) {
  if (vertex >= d.vertices.size()) throw DomainError("vertex_polynomial: vertex " + std::to_string(vertex) + " not in diagram");
  const auto v = d.vertices[vertex];
  const long gx = d.n - v.x;
  return UniPoly::monomial(poly.coefficient({v.y, gx}), static_cast<std::size_t>(gx));
}

struct RootEstimate {
  double value = 0;
  double error = 0;
  int multiplicity = 1;
};

/// Branches attached to one edge: `count` eigenvalues behave like c·t^degree
/// for the nonzero real roots c of f_Γ; `identically_zero` branches come from
/// the extension, and `complex_roots` counts nonzero roots of f_Γ off the
/// real line (with multiplicity).
struct LeadingTerm {
  Rational degree;
  std::vector<RootEstimate> coefficients;
  long count = 0;
  long identically_zero = 0;
  long complex_roots = 0;
};

inline std::vector<RootEstimate> nonzero_real_roots(const UniPoly& f, long* complex_count = nullptr) {
  const UniPoly g = f.shift_down(f.low_order());
  std::vector<RootEstimate> out;
  long real_mult = 0;
  if (g.degree() >= 1) {
    for (const auto& root : real_roots(g)) {
      out.push_back({root.value(), root.error_bound(), root.multiplicity});
      real_mult += root.multiplicity;
    }
  }
  if (complex_count) *complex_count = std::max<long>(g.degree(), 0) - real_mult;
  return out;
}

inline std::vector<LeadingTerm> leading_terms(const NewtonDiagram& d, const BivariatePoly& poly, bool psd_a = true) {
  std::vector<LeadingTerm> out;
  for (std::size_t e = 0; e < d.edges.size(); ++e) {
    const auto& ed = d.edges[e];
    if (psd_a && ed.slope > 2)
      throw InvariantViolation("leading_terms: edge slope " + to_string(ed.slope) + " > 2 with PSD A");
    LeadingTerm lt;
    lt.degree = ed.slope;
    lt.count = ed.multiplicity;
    lt.identically_zero = ed.extension;
    if (ed.end.x > ed.start.x) lt.coefficients = nonzero_real_roots(edge_polynomial(d, e, poly), &lt.complex_roots);
    out.push_back(std::move(lt));
  }
  return out;
}

inline std::vector<LeadingTerm> leading_terms(const PerturbedPencil& pc) {
  const auto poly = expand_charpoly(pc);
  return leading_terms(build_diagram(poly), poly, true);
}

/// Leading exponent of eigenvalue branch `branch` (0-based, ascending order at
/// t = 1e-3), estimated from |λ(t)| at t = 10^{-3-j/2}, j = 0..6. The branch
/// is followed by maximal eigenvector overlap; the least-squares slope of
/// log|λ| against log t is rounded to the nearest rational with denominator
/// at most 4.
inline Rational numeric_leading_degree(const PerturbedPencil& pc, std::size_t branch) {
  if (branch >= pc.n()) throw DomainError("numeric_leading_degree: branch index out of range");
  const auto a = FloatSymMatrix::from_exact(pc.A());
  const auto b = FloatSymMatrix::from_exact(pc.B());
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> xs, ys;
  std::vector<double> prev;
  for (int j = 0; j <= 6; ++j) {
    const double t = std::pow(10.0, -3.0 - 0.5 * j);
    const auto m = a + t * b;
    const auto e = eigh(m);
    std::size_t idx = branch;
    if (j > 0) {
      double best = -1, second = -1;
      for (std::size_t k = 0; k < e.vectors.size(); ++k) {
        double ov = 0;
        for (std::size_t i = 0; i < prev.size(); ++i) ov += prev[i] * e.vectors[k][i];
        ov = std::abs(ov);
        if (ov > best) {
          second = best;
          best = ov;
          idx = k;
        } else if (ov > second) {
          second = ov;
        }
      }
      if (best - second < 1e-9) throw TrackingError("numeric_leading_degree: ambiguous eigenvector overlap at t = " + std::to_string(t));
    }
    const double lam = e.values[idx];
    for (std::size_t k = 0; k < e.values.size(); ++k)
      if (k != idx && std::abs(e.values[k] - lam) <= 1e-9 * std::max(std::abs(lam), 1e-300))
        throw TrackingError("numeric_leading_degree: eigenvalue collision at t = " + std::to_string(t));
    if (std::abs(lam) < 64 * eps * m.frobenius())
      throw TrackingError("numeric_leading_degree: branch indistinguishable from zero at t = " + std::to_string(t));
    prev = e.vectors[idx];
    xs.push_back(std::log(t));
    ys.push_back(std::log(std::abs(lam)));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return rationalize(sxy / sxx, 4);
}

}  // namespace psdpencil
