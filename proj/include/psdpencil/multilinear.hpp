#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "psdpencil/errors.hpp"
#include "psdpencil/exact_linalg.hpp"

namespace psdpencil {

/// A matrix whose rows and columns are indexed by lexicographically ordered
/// subsets. Compound and adjugate matrices are stored this way. The empty
/// object (no labels) is the conventional zero used for negative orders.
struct LabeledMatrix {
  std::vector<IndexSubset> row_labels;
  std::vector<IndexSubset> col_labels;
  ExactMatrix body;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  bool empty() const { return row_labels.empty() || col_labels.empty(); }

  const Rational& at(const IndexSubset& alpha, const IndexSubset& beta) const {
    return body(index_of(row_labels, alpha), index_of(col_labels, beta));
  }

 private:
  static std::size_t index_of(const std::vector<IndexSubset>& labels, const IndexSubset& s) {
    auto it = std::lower_bound(labels.begin(), labels.end(), s);
    if (it == labels.end() || *it != s) throw DimensionError("label " + s.str() + " not present");
    return static_cast<std::size_t>(it - labels.begin());
  }
};

/// ⟨X, Y⟩ = tr(XᵀY). Either side being the empty zero object gives 0.
inline Rational inner(const LabeledMatrix& x, const LabeledMatrix& y) {
  if (x.empty() || y.empty()) return 0;
  if (x.row_labels != y.row_labels || x.col_labels != y.col_labels)
    throw DimensionError("inner product of differently labeled matrices");
  Rational s = 0;
  const auto& a = x.body.data();
  const auto& b = y.body.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
  return s;
}

/// C_k(A): the binom(m,k) × binom(n,k) matrix of k×k minors.
/// C_0(A) = [1]; k < 0 gives the empty zero object.
inline LabeledMatrix compound(const ExactMatrix& a, long k) {
  LabeledMatrix out;
  out.row_labels = subsets_lex(a.rows(), k);
  out.col_labels = subsets_lex(a.cols(), k);
  out.body = ExactMatrix(out.row_labels.size(), out.col_labels.size());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out.body(i, j) = det(submatrix(a, out.row_labels[i], out.col_labels[j]));
  return out;
}

/// C_k^d(A): entry (α, β) is the sum of d×d principal minors of A[α, β].
/// d < 0 gives the zero matrix; d = 0 on a square A gives the identity.
inline LabeledMatrix compound_pm(const ExactMatrix& a, long k, long d) {
  LabeledMatrix out;
  out.row_labels = subsets_lex(a.rows(), k);
  out.col_labels = subsets_lex(a.cols(), k);
  out.body = ExactMatrix(out.row_labels.size(), out.col_labels.size());
  if (d < 0 || d > k) return out;
  if (d == 0 && a.is_square()) {
    for (std::size_t i = 0; i < out.rows(); ++i) out.body(i, i) = 1;
    return out;
  }
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out.body(i, j) = principal_minor_sum(submatrix(a, out.row_labels[i], out.col_labels[j]),
                                           static_cast<std::size_t>(d));
  return out;
}

/// Sign (−1)^{|α|+|β|} attached to a k-th adjugate entry.
inline int adjugate_sign(const IndexSubset& alpha, const IndexSubset& beta) {
  return (alpha.index_sum() + beta.index_sum()) % 2 ? -1 : 1;
}

/// adj_k(A): entry (α, β) = (−1)^{|α|+|β|} det A[βᶜ, αᶜ] over ⟨n⟩_k.
/// adj_0(A) = [det A], adj_n(A) = [1], adj_1(A) is the classical adjugate,
/// and k < 0 gives the empty zero object.
inline LabeledMatrix adjugate_k(const ExactMatrix& a, long k) {
  if (!a.is_square()) throw DimensionError("k-th adjugate of a non-square matrix");
  LabeledMatrix out;
  out.row_labels = subsets_lex(a.rows(), k);
  out.col_labels = out.row_labels;
  out.body = ExactMatrix(out.rows(), out.cols());
  std::vector<IndexSubset> comps;
  comps.reserve(out.rows());
  for (const auto& s : out.row_labels) comps.push_back(s.complement());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) {
      Rational v = det(submatrix(a, comps[j], comps[i]));
      if (v == 0) continue;
      out.body(i, j) = adjugate_sign(out.row_labels[i], out.col_labels[j]) < 0 ? Rational(-v) : v;
    }
  return out;
}

/// adjv(A) for an m×n matrix with m ≠ n. For m < n this is the row vector over
/// α ∈ ⟨n⟩_{n−m} with entries ±det A[[m], αᶜ]; the sign is (−1)^{|α| − k(k+1)/2}
/// with k = #α, so the first entry is always '+' (matches the 2×3 worked case
/// (bf−ce, −(af−cd), ae−bd)). For m > n it is the transpose of adjv(Aᵀ).
inline LabeledMatrix adjugate_vector(const ExactMatrix& a) {
  if (a.rows() == a.cols()) throw DomainError("adjugate vector requires a non-square matrix");
  if (a.rows() > a.cols()) {
    LabeledMatrix row = adjugate_vector(a.transpose());
    LabeledMatrix out;
    out.row_labels = row.col_labels;
    out.col_labels = row.row_labels;
    out.body = row.body.transpose();
    return out;
  }
  const std::size_t m = a.rows(), n = a.cols(), k = n - m;
  LabeledMatrix out;
  out.row_labels = {IndexSubset::full(m)};
  out.col_labels = subsets_lex(n, static_cast<long>(k));
  out.body = ExactMatrix(1, out.cols());
  const std::size_t shift = k * (k + 1) / 2;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    Rational v = det(submatrix(a, out.row_labels[0], out.col_labels[j].complement()));
    const bool negative = (out.col_labels[j].index_sum() + shift) % 2 == 1;
    out.body(0, j) = negative ? Rational(-v) : v;
  }
  return out;
}

/// Coefficients of det(A + tB) = Σ_i tr(adj_i(A) C_i(B)) tⁱ, lowest degree
/// first. The trace form equals ⟨adj_i(A), C_i(B)⟩ only for symmetric A.
inline std::vector<Rational> det_pencil_coefficients(const ExactMatrix& a, const ExactMatrix& b) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
    throw DimensionError("det(A + tB) needs square matrices of equal size");
  std::vector<Rational> c(a.rows() + 1);
  for (std::size_t i = 0; i <= a.rows(); ++i) {
    const auto adj = adjugate_k(a, static_cast<long>(i));
    const auto cb = compound(b, static_cast<long>(i));
    for (std::size_t r = 0; r < adj.rows(); ++r)
      for (std::size_t s = 0; s < adj.cols(); ++s)
        if (adj.body(r, s) != 0) c[i] += adj.body(r, s) * cb.body(s, r);
  }
  return c;
}

/// Evaluates Σ_{(r+2ℓ)×(r+2ℓ)}|M| through the squared-minor identity for a
/// symmetric M partitioned with an ℓ×ℓ leading block, M₂₁ = [b₁ ⋯ b_ℓ] and
/// M₂₂ = Σ u_k c_k c_kᵀ, requiring r + ℓ ≤ m:
///
///   (−1)^ℓ · u₁⋯u_r · Σ_{(r+ℓ)×(r+ℓ)} |b₁ ⋯ b_ℓ c₁ ⋯ c_r|²
///
/// with the product of u's read as 1 when r = 0. The decomposition of M₂₂ is
/// part of the input and is checked, not computed.
inline Rational pm_sum_factorization(const ExactMatrix& mat, std::size_t ell, std::size_t r,
                                     std::span<const std::vector<Rational>> b_cols,
                                     std::span<const std::vector<Rational>> c_cols,
                                     std::span<const Rational> u) {
  if (!mat.is_symmetric()) throw ContractError("pm_sum_factorization: M must be symmetric");
  if (mat.rows() < ell) throw ContractError("pm_sum_factorization: leading block larger than M");
  const std::size_t m = mat.rows() - ell;
  if (r + ell > m)
    throw ContractError("pm_sum_factorization: r + ell = " + std::to_string(r + ell) + " exceeds m = " +
                        std::to_string(m));
  if (b_cols.size() != ell || c_cols.size() != r || u.size() != r)
    throw ContractError("pm_sum_factorization: expected " + std::to_string(ell) + " b-columns and " +
                        std::to_string(r) + " c-columns / u-values");
  for (std::size_t k = 0; k < ell; ++k) {
    if (b_cols[k].size() != m) throw ContractError("pm_sum_factorization: b-column has wrong length");
    for (std::size_t i = 0; i < m; ++i)
      if (mat(ell + i, k) != b_cols[k][i])
        throw ContractError("pm_sum_factorization: M21 column " + std::to_string(k + 1) + " differs from b");
  }
  for (const auto& c : c_cols)
    if (c.size() != m) throw ContractError("pm_sum_factorization: c-column has wrong length");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      Rational v = 0;
      for (std::size_t k = 0; k < r; ++k) v += u[k] * c_cols[k][i] * c_cols[k][j];
      if (v != mat(ell + i, ell + j)) throw ContractError("pm_sum_factorization: M22 != C D C^T");
    }

  std::vector<std::vector<Rational>> cols(b_cols.begin(), b_cols.end());
  cols.insert(cols.end(), c_cols.begin(), c_cols.end());
  Rational value = squared_minor_sum(ExactMatrix::from_columns(m, cols), r + ell);
  for (const auto& uk : u) value *= uk;
  return ell % 2 ? Rational(-value) : value;
}

}  // namespace psdpencil
