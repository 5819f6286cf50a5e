#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "psdpencil/errors.hpp"
#include "psdpencil/exact_linalg.hpp"

namespace psdpencil {

/// Dense symmetric matrix of doubles. Construction rejects inputs whose
/// asymmetry exceeds 1e-14 relative to the largest entry, then symmetrizes.
class FloatSymMatrix {
 public:
  FloatSymMatrix() = default;
  explicit FloatSymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  FloatSymMatrix(std::size_t n, std::vector<double> data) : n_(n), a_(std::move(data)) {
    if (a_.size() != n * n) throw DimensionError("FloatSymMatrix: expected " + std::to_string(n * n) + " entries");
    double scale = 0;
    for (double v : a_) {
      if (!std::isfinite(v)) throw DomainError("FloatSymMatrix: non-finite entry");
      scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        double& x = a_[i * n_ + j];
        double& y = a_[j * n_ + i];
        if (std::abs(x - y) > 1e-14 * scale)
          throw ContractError("FloatSymMatrix: entries (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ") and (" + std::to_string(j + 1) + "," + std::to_string(i + 1) + ") differ");
        x = y = 0.5 * (x + y);
      }
  }

  static FloatSymMatrix from_exact(const ExactMatrix& m) {
    if (!m.is_square()) throw DimensionError("FloatSymMatrix: matrix is not square");
    std::vector<double> d(m.data().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = m.data()[i].get_d();
    return FloatSymMatrix(m.rows(), std::move(d));
  }

  static FloatSymMatrix identity(std::size_t n) {
    FloatSymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t n() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<double>& data() const { return a_; }

  double frobenius() const {
    double s = 0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  friend FloatSymMatrix operator+(FloatSymMatrix a, const FloatSymMatrix& b) {
    for (std::size_t i = 0; i < a.a_.size(); ++i) a.a_[i] += b.a_[i];
    return a;
  }
  friend FloatSymMatrix operator-(FloatSymMatrix a, const FloatSymMatrix& b) {
    for (std::size_t i = 0; i < a.a_.size(); ++i) a.a_[i] -= b.a_[i];
    return a;
  }
  friend FloatSymMatrix operator*(double s, FloatSymMatrix a) {
    for (double& v : a.a_) v *= s;
    return a;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// ⟨X, Y⟩ = tr(XY) for symmetric X, Y.
inline double frob_inner(const FloatSymMatrix& x, const FloatSymMatrix& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.data().size(); ++i) s += x.data()[i] * y.data()[i];
  return s;
}

/// Eigenvalues ascending; vectors[i] is the unit eigenvector of values[i].
struct EigenDecomposition {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

/// vᵀ M v
inline double quadratic_form(const FloatSymMatrix& m, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < m.n(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < m.n(); ++j) row += m(i, j) * v[j];
    s += v[i] * row;
  }
  return s;
}

/// Cyclic Jacobi. A rotation at (p, q) is skipped once |a_pq| is negligible
/// relative to sqrt(|a_pp a_qq|), which keeps small eigenvalues accurate to
/// high relative precision. Sweeps stop when no rotation fires.
inline EigenDecomposition eigh(const FloatSymMatrix& m, int max_sweeps = 100) {
  const std::size_t n = m.n();
  std::vector<double> a = m.data();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1;
  const double eps = std::numeric_limits<double>::epsilon();
  const double norm = m.frobenius();
  const double floor = eps * eps * norm;
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0) continue;
        if (std::abs(apq) <= floor || std::abs(apq) <= 0.5 * eps * std::sqrt(std::abs(A(p, p) * A(q, q)))) {
          continue;
        }
        rotated = true;
        const double theta = (A(q, q) - A(p, p)) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = A(q, p) = 0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    converged = !rotated;
  }
  if (!converged) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += A(i, j) * A(i, j);
    if (std::sqrt(off) > 1e-14 * norm)
      throw NumericalError("eigh: Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return A(i, i) < A(j, j); });
  EigenDecomposition out;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (auto idx : order) {
    out.values.push_back(A(idx, idx));
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k * n + idx];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

/// Σ w_i v_i v_iᵀ over the given eigenpairs.
inline FloatSymMatrix reassemble(const EigenDecomposition& e, const std::vector<double>& weights) {
  const std::size_t n = e.vectors.empty() ? 0 : e.vectors[0].size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0) continue;
    const auto& vk = e.vectors[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] += weights[k] * vk[i] * vk[j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = 0.5 * (d[i * n + j] + d[j * n + i]);
  return FloatSymMatrix(n, std::move(d));
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero.
inline FloatSymMatrix project_psd(const FloatSymMatrix& u) {
  auto e = eigh(u);
  std::vector<double> w = e.values;
  for (double& x : w) x = std::max(x, 0.0);
  return reassemble(e, w);
}

/// The line E = {A + tB}. A must be PSD within 1e-10 (relative to max(1, ‖A‖)).
class LinePencil {
 public:
  LinePencil(FloatSymMatrix a, FloatSymMatrix b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.n() != b_.n()) throw DimensionError("LinePencil: A and B differ in size");
    b_norm_sq_ = frob_inner(b_, b_);
    if (!(b_norm_sq_ > 0)) throw DomainError("LinePencil: direction B is zero");
    auto e = eigh(a_);
    if (!e.values.empty() && e.values.front() < -1e-10 * std::max(1.0, a_.frobenius()))
      throw DomainError("LinePencil: A is not PSD (min eigenvalue " + std::to_string(e.values.front()) + ")");
  }

  const FloatSymMatrix& A() const { return a_; }
  const FloatSymMatrix& B() const { return b_; }
  double B_norm_sq() const { return b_norm_sq_; }
  double B_norm() const { return std::sqrt(b_norm_sq_); }
  FloatSymMatrix at(double t) const { return a_ + t * b_; }

 private:
  FloatSymMatrix a_, b_;
  double b_norm_sq_ = 0;
};

/// Parameter of P_E(V): t = ⟨B, V − A⟩ / ‖B‖².
inline double project_line(const FloatSymMatrix& v, const LinePencil& pc) {
  return frob_inner(pc.B(), v - pc.A()) / pc.B_norm_sq();
}

inline double ap_step_matrix(double t, const LinePencil& pc) {
  return project_line(project_psd(pc.at(t)), pc);
}

/// T = t − Σ_{λ_i(t) < 0} λ_i(t)(v_iᵀ B v_i) / ‖B‖². Membership of n(t)
/// uses strict λ < 0, the same cut project_psd applies.
inline double ap_step_scalar(double t, const LinePencil& pc) {
  const auto e = eigh(pc.at(t));
  double s = 0;
  for (std::size_t i = 0; i < e.values.size() && e.values[i] < 0; ++i)
    s += e.values[i] * quadratic_form(pc.B(), e.vectors[i]);
  return t - s / pc.B_norm_sq();
}

enum class APPath { Scalar, Matrix };
/// RoundoffFloor: the step stalled at |t| < ε|t0|, where the correction is
/// lost to rounding. Only FixedPoint means φ(t) is PSD at a point t ≠ 0.
enum class APStatus { Converged, MaxIter, FixedPoint, RoundoffFloor };

inline const char* to_string(APPath p) { return p == APPath::Scalar ? "scalar" : "matrix"; }
inline const char* to_string(APStatus s) {
  switch (s) {
    case APStatus::Converged: return "converged";
    case APStatus::MaxIter: return "max_iter";
    case APStatus::FixedPoint: return "fixed_point";
    case APStatus::RoundoffFloor: return "roundoff_floor";
  }
  return "?";
}

struct TraceRow {
  std::size_t k;
  double t;
  double err;
};

struct APTrace {
  std::vector<TraceRow> rows;
  APPath path = APPath::Scalar;
  APStatus status = APStatus::MaxIter;
};

struct RunOptions {
  std::size_t max_iter = 1000000;
  double tol = 1e-12;
  APPath path = APPath::Scalar;
};

/// Iterates t ← T(t) from t0, recording (k, t_k, |t_k|·‖B‖) for k = 0, 1, ….
/// Stops when |t_k| < tol, after max_iter steps, or at a numerical fixed
/// point (|T − t| ≤ 4ε|t|, i.e. φ(t) is already PSD, or a roundoff floor
/// when |t| < ε|t0|). |t_k| > 1e3·|t0|
/// raises DivergenceError.
inline APTrace run_ap(const LinePencil& pc, double t0, const RunOptions& opt = {}) {
  if (t0 == 0 || !std::isfinite(t0)) throw DomainError("run_ap: t0 must be finite and nonzero");
  if (opt.max_iter < 1) throw DomainError("run_ap: max_iter must be at least 1");
  const double bn = pc.B_norm();
  const double eps = std::numeric_limits<double>::epsilon();
  APTrace tr;
  tr.path = opt.path;
  tr.rows.reserve(std::min<std::size_t>(opt.max_iter + 1, 1 << 20));
  double t = t0;
  tr.rows.push_back({0, t, std::abs(t) * bn});
  for (std::size_t k = 1; k <= opt.max_iter; ++k) {
    if (std::abs(t) < opt.tol) {
      tr.status = APStatus::Converged;
      return tr;
    }
    const double next = opt.path == APPath::Scalar ? ap_step_scalar(t, pc) : ap_step_matrix(t, pc);
    if (!std::isfinite(next) || std::abs(next) > 1e3 * std::abs(t0))
      throw DivergenceError("run_ap: |t_" + std::to_string(k) + "| exceeded 1e3 |t0|");
    if (std::abs(next - t) <= 4 * eps * std::abs(t)) {
      tr.status = std::abs(t) < eps * std::abs(t0) ? APStatus::RoundoffFloor : APStatus::FixedPoint;
      return tr;
    }
    t = next;
    tr.rows.push_back({k, t, std::abs(t) * bn});
  }
  tr.status = std::abs(t) < opt.tol ? APStatus::Converged : APStatus::MaxIter;
  return tr;
}

inline void write_trace_csv(std::ostream& os, const APTrace& tr) {
  os << "k,t_k,err_k\n";
  char buf[96];
  for (const auto& r : tr.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.k, r.t, r.err);
    os << buf;
  }
}

}  // namespace psdpencil
