#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psdpencil/errors.hpp"
#include "psdpencil/rational.hpp"

namespace psdpencil {

/// A subset of [n] = {1, ..., n}, stored as strictly increasing 1-based
/// members. Ordering is lexicographic on the member list, which is the order
/// used for the rows and columns of compound matrices.
class IndexSubset {
 public:
  IndexSubset() = default;

  IndexSubset(std::size_t ground, std::vector<std::size_t> members)
      : ground_(ground), members_(std::move(members)) {
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (members_[i] < 1 || members_[i] > ground_)
        throw DimensionError("index " + std::to_string(members_[i]) + " outside [1, " +
                             std::to_string(ground_) + "]");
      if (i > 0 && members_[i] <= members_[i - 1])
        throw DimensionError("subset members must be strictly increasing");
    }
  }

  static IndexSubset full(std::size_t n) {
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = i + 1;
    return IndexSubset(n, std::move(m));
  }

  static IndexSubset range(std::size_t ground, std::size_t first, std::size_t last) {
    std::vector<std::size_t> m;
    for (std::size_t i = first; i <= last; ++i) m.push_back(i);
    return IndexSubset(ground, std::move(m));
  }

  std::size_t ground() const { return ground_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t operator[](std::size_t i) const { return members_[i]; }

  bool contains(std::size_t j) const { return std::binary_search(members_.begin(), members_.end(), j); }

  /// |α|: the sum of the members.
  std::size_t index_sum() const {
    std::size_t s = 0;
    for (auto v : members_) s += v;
    return s;
  }

  IndexSubset complement() const {
    std::vector<std::size_t> out;
    out.reserve(ground_ - members_.size());
    for (std::size_t j = 1; j <= ground_; ++j)
      if (!contains(j)) out.push_back(j);
    return IndexSubset(ground_, std::move(out));
  }

  std::string str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(members_[i]);
    }
    return s + "}";
  }

  friend bool operator==(const IndexSubset& a, const IndexSubset& b) {
    return a.ground_ == b.ground_ && a.members_ == b.members_;
  }
  friend std::strong_ordering operator<=>(const IndexSubset& a, const IndexSubset& b) {
    return a.members_ <=> b.members_;
  }

 private:
  std::size_t ground_ = 0;
  std::vector<std::size_t> members_;
};

inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// ⟨n⟩_k: all k-subsets of [n] in lexicographic order. k = 0 yields the
/// single empty subset; k < 0 or k > n yields nothing.
inline std::vector<IndexSubset> subsets_lex(std::size_t n, long k) {
  std::vector<IndexSubset> out;
  if (k < 0 || static_cast<std::size_t>(k) > n) return out;
  const auto kk = static_cast<std::size_t>(k);
  out.reserve(binomial(n, kk));
  std::vector<std::size_t> cur(kk);
  for (std::size_t i = 0; i < kk; ++i) cur[i] = i + 1;
  while (true) {
    out.emplace_back(n, cur);
    if (kk == 0) break;
    std::size_t i = kk;
    while (i > 0 && cur[i - 1] == n - kk + i) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < kk; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

/// Dense row-major matrix of exact rationals.
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ExactMatrix(std::size_t rows, std::size_t cols, std::vector<Rational> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DimensionError("entry count does not match rows x cols");
  }
  ExactMatrix(std::initializer_list<std::initializer_list<Rational>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ExactMatrix identity(std::size_t n) {
    ExactMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static ExactMatrix diagonal(std::span<const Rational> d) {
    ExactMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  /// Builds a matrix whose columns are the given vectors (all of length rows).
  static ExactMatrix from_columns(std::size_t rows, std::span<const std::vector<Rational>> cols) {
    ExactMatrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != rows) throw DimensionError("column length mismatch");
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  const std::vector<Rational>& data() const { return data_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  bool is_symmetric() const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Rational& q) { return q == 0; });
  }

  bool is_diagonal() const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (i != j && (*this)(i, j) != 0) return false;
    return true;
  }

  std::vector<Rational> column(std::size_t j) const {
    std::vector<Rational> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  ExactMatrix transpose() const {
    ExactMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Rational trace() const {
    if (!is_square()) throw DimensionError("trace of a non-square matrix");
    Rational s = 0;
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
    return s;
  }

  friend bool operator==(const ExactMatrix& a, const ExactMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend ExactMatrix operator+(const ExactMatrix& a, const ExactMatrix& b) {
    a.require_same_shape(b);
    ExactMatrix r = a;
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] += b.data_[i];
    return r;
  }

  friend ExactMatrix operator-(const ExactMatrix& a, const ExactMatrix& b) {
    a.require_same_shape(b);
    ExactMatrix r = a;
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] -= b.data_[i];
    return r;
  }

  friend ExactMatrix operator*(const Rational& s, const ExactMatrix& a) {
    ExactMatrix r = a;
    for (auto& v : r.data_) v *= s;
    return r;
  }

  friend ExactMatrix operator*(const ExactMatrix& a, const ExactMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
    ExactMatrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Rational& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

 private:
  void require_same_shape(const ExactMatrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) throw DimensionError("matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

/// [A | B]
inline ExactMatrix hcat(const ExactMatrix& a, const ExactMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("hcat: row counts differ");
  ExactMatrix r(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) r(i, a.cols() + j) = b(i, j);
  }
  return r;
}

/// A[α, β] with 1-based subsets; A[α] when rows == cols.
inline ExactMatrix submatrix(const ExactMatrix& a, const IndexSubset& rows, const IndexSubset& cols) {
  if (rows.ground() != a.rows() || cols.ground() != a.cols())
    throw DimensionError("subset ground sizes " + std::to_string(rows.ground()) + "x" +
                         std::to_string(cols.ground()) + " do not match a " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " matrix");
  ExactMatrix s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i] - 1, cols[j] - 1);
  return s;
}

inline ExactMatrix submatrix(const ExactMatrix& a, const IndexSubset& alpha) { return submatrix(a, alpha, alpha); }

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
/// The 0x0 determinant is 1.
inline Rational det(const ExactMatrix& a) {
  if (!a.is_square()) throw DimensionError("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  ExactMatrix m = a;
  Rational prev = 1;
  bool negate = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t p = k;
    while (p < n && m(p, k) == 0) ++p;
    if (p == n) return 0;
    if (p != k) {
      for (std::size_t j = k; j < n; ++j) std::swap(m(p, j), m(k, j));
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
      }
      m(i, k) = 0;
    }
    prev = m(k, k);
  }
  return negate ? Rational(-m(n - 1, n - 1)) : m(n - 1, n - 1);
}

/// Determinant by Laplace expansion along the first row. Exponential; kept as
/// an independent check on `det` for small matrices.
inline Rational det_cofactor(const ExactMatrix& a) {
  if (!a.is_square()) throw DimensionError("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  if (n == 1) return a(0, 0);
  Rational total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (a(0, j) == 0) continue;
    ExactMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t c = 0, cc = 0; c < n; ++c) {
        if (c == j) continue;
        minor(i - 1, cc++) = a(i, c);
      }
    Rational term = a(0, j) * det_cofactor(minor);
    if (j % 2) total -= term;
    else total += term;
  }
  return total;
}

/// Exact rank over the rationals (fraction-free Gaussian elimination).
inline std::size_t rank(const ExactMatrix& a) {
  ExactMatrix m = a;
  const std::size_t rows = m.rows(), cols = m.cols();
  Rational prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m(p, c) == 0) ++p;
    if (p == rows) continue;
    if (p != r)
      for (std::size_t j = c; j < cols; ++j) std::swap(m(p, j), m(r, j));
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) m(i, j) = (m(i, j) * m(r, c) - m(i, c) * m(r, j)) / prev;
      m(i, c) = 0;
    }
    prev = m(r, c);
    ++r;
  }
  return r;
}

/// Σ_{d×d}|A|: the sum of all d×d principal minors; 1 when d = 0.
inline Rational principal_minor_sum(const ExactMatrix& a, std::size_t d) {
  if (!a.is_square()) throw DimensionError("principal minors of a non-square matrix");
  if (d > a.rows())
    throw DomainError("principal minor size " + std::to_string(d) + " exceeds matrix size " +
                      std::to_string(a.rows()));
  Rational s = 0;
  for (const auto& alpha : subsets_lex(a.rows(), static_cast<long>(d))) s += det(submatrix(a, alpha));
  return s;
}

/// Σ_{N×N}|A|²: the sum of squares of all N×N minors; 1 when N = 0.
inline Rational squared_minor_sum(const ExactMatrix& a, std::size_t order) {
  if (order > std::min(a.rows(), a.cols()))
    throw DomainError("minor size " + std::to_string(order) + " exceeds min(rows, cols) of a " +
                      std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " matrix");
  const auto row_sets = subsets_lex(a.rows(), static_cast<long>(order));
  const auto col_sets = subsets_lex(a.cols(), static_cast<long>(order));
  Rational s = 0;
  for (const auto& alpha : row_sets)
    for (const auto& beta : col_sets) {
      Rational v = det(submatrix(a, alpha, beta));
      s += v * v;
    }
  return s;
}

}  // namespace psdpencil
