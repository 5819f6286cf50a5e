#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "psdpencil/errors.hpp"
#include "psdpencil/exact_linalg.hpp"
#include "psdpencil/multilinear.hpp"
#include "psdpencil/polynomial.hpp"

namespace psdpencil {

/// S = Σ u_k c_k c_kᵀ with exactly rank(S) terms and all u_k ≠ 0.
struct SymmetricFactorization {
  std::vector<std::vector<Rational>> c;
  std::vector<Rational> u;

  std::size_t rank() const { return u.size(); }
};

/// Exact symmetric elimination. A nonzero diagonal entry S_ii gives a 1×1
/// pivot (c = S e_i / S_ii, u = S_ii). With a zero diagonal and S_ij = a ≠ 0,
/// the 2×2 pivot removes (x yᵀ + y xᵀ)/a for x = S e_i, y = S e_j, written as
/// the two rank-one terms c = x ± y, u = ±1/(2a).
inline SymmetricFactorization symmetric_factorization(const ExactMatrix& s) {
  if (!s.is_symmetric()) throw ContractError("symmetric_factorization: matrix is not symmetric");
  const std::size_t m = s.rows();
  ExactMatrix w = s;
  SymmetricFactorization out;
  auto subtract = [&](const std::vector<Rational>& c, const Rational& u) {
    for (std::size_t i = 0; i < m; ++i) {
      if (c[i] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) w(i, j) -= u * c[i] * c[j];
    }
    out.c.push_back(c);
    out.u.push_back(u);
  };
  while (!w.is_zero()) {
    std::size_t piv = m;
    for (std::size_t i = 0; i < m && piv == m; ++i)
      if (w(i, i) != 0) piv = i;
    if (piv < m) {
      Rational u = w(piv, piv);
      auto c = w.column(piv);
      for (auto& v : c) v /= u;
      subtract(c, u);
      continue;
    }
    std::size_t pi = m, pj = m;
    for (std::size_t i = 0; i < m && pi == m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (w(i, j) != 0) {
          pi = i;
          pj = j;
          break;
        }
    const Rational a = w(pi, pj);
    const auto x = w.column(pi), y = w.column(pj);
    std::vector<Rational> plus(m), minus(m);
    for (std::size_t k = 0; k < m; ++k) {
      plus[k] = x[k] + y[k];
      minus[k] = x[k] - y[k];
    }
    const Rational h = 1 / (2 * a);
    subtract(plus, h);
    subtract(minus, -h);
  }
  return out;
}

/// A + tB with A = diag(p_1, …, p_{n−m}, 0, …, 0), p_k > 0, B symmetric and
/// partitioned conformally:
///
///     B = [ B11  B21ᵀ ]    B11: (n−m)×(n−m), B21: m×(n−m), B22: m×m.
///         [ B21  B22  ]
///
/// m = 0 (A nonsingular, the transversal case) and m = n (A = 0) are both
/// accepted.
class PerturbedPencil {
 public:
  PerturbedPencil(std::vector<Rational> p, ExactMatrix b) : p_(std::move(p)), b_(std::move(b)) {
    if (!b_.is_square()) throw DimensionError("pencil: B must be square");
    if (!b_.is_symmetric()) throw ContractError("pencil: B must be symmetric");
    if (b_.rows() == 0 || p_.size() > b_.rows())
      throw DimensionError("pencil: need n >= 1 and #p <= n, got #p = " + std::to_string(p_.size()) +
                           ", n = " + std::to_string(b_.rows()));
    for (std::size_t k = 0; k < p_.size(); ++k)
      if (p_[k] <= 0) throw ContractError("pencil: p_" + std::to_string(k + 1) + " must be positive");
    n_ = b_.rows();
    m_ = n_ - p_.size();
    std::vector<Rational> diag = p_;
    diag.resize(n_);
    a_ = ExactMatrix::diagonal(diag);
    if (m_ > 0 && m_ < n_) {
      const auto top = IndexSubset::range(n_, 1, n_ - m_);
      const auto bottom = IndexSubset::range(n_, n_ - m_ + 1, n_);
      b11_ = submatrix(b_, top);
      b21_ = submatrix(b_, bottom, top);
      b22_ = submatrix(b_, bottom);
    } else if (m_ == 0) {
      b11_ = b_;
      b21_ = ExactMatrix(0, n_);
      b22_ = ExactMatrix(0, 0);
    } else {
      b11_ = ExactMatrix(0, 0);
      b21_ = ExactMatrix(n_, 0);
      b22_ = b_;
    }
    fact_ = symmetric_factorization(b22_);
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  /// rank of B22
  std::size_t r() const { return fact_.rank(); }
  bool full_rank() const { return m_ == 0; }

  const std::vector<Rational>& p() const { return p_; }
  const ExactMatrix& A() const { return a_; }
  const ExactMatrix& B() const { return b_; }
  const ExactMatrix& B11() const { return b11_; }
  const ExactMatrix& B21() const { return b21_; }
  const ExactMatrix& B22() const { return b22_; }
  const std::vector<std::vector<Rational>>& C() const { return fact_.c; }
  const std::vector<Rational>& u() const { return fact_.u; }

  /// Product p_1 ⋯ p_{n−m}.
  Rational p_product() const {
    Rational v = 1;
    for (const auto& x : p_) v *= x;
    return v;
  }

  /// [B21 B22], the m×n bottom block row.
  ExactMatrix bottom_rows() const { return hcat(b21_, b22_); }

 private:
  std::vector<Rational> p_;
  ExactMatrix b_;
  std::size_t n_ = 0, m_ = 0;
  ExactMatrix a_, b11_, b21_, b22_;
  SymmetricFactorization fact_;
};

using AdjugateFn = std::function<LabeledMatrix(const ExactMatrix&, long)>;

namespace detail {

/// Coefficients c_j with det(xE + N[rows, cols]) = Σ_j c_j x^{k−j}, where E
/// has a 1 wherever the row and column indices coincide. Choosing a set S of
/// coinciding pairs contributes (−1)^{Σ positions} det N[rows∖S, cols∖S].
inline std::vector<Rational> shifted_minor_coefficients(const ExactMatrix& nmat, const IndexSubset& rows,
                                                        const IndexSubset& cols) {
  const std::size_t k = rows.size();
  std::vector<std::pair<std::size_t, std::size_t>> match;
  for (std::size_t p = 0, q = 0; p < k && q < k;) {
    if (rows[p] == cols[q]) match.emplace_back(p++, q++);
    else if (rows[p] < cols[q]) ++p;
    else ++q;
  }
  std::vector<Rational> c(k + 1);
  for (std::size_t mask = 0; mask < (std::size_t{1} << match.size()); ++mask) {
    std::vector<bool> drop_r(k, false), drop_c(k, false);
    std::size_t parity = 0, chosen = 0;
    for (std::size_t e = 0; e < match.size(); ++e)
      if (mask >> e & 1) {
        drop_r[match[e].first] = drop_c[match[e].second] = true;
        parity += match[e].first + match[e].second;
        ++chosen;
      }
    std::vector<std::size_t> rr, cc;
    for (std::size_t p = 0; p < k; ++p) {
      if (!drop_r[p]) rr.push_back(rows[p]);
      if (!drop_c[p]) cc.push_back(cols[p]);
    }
    Rational v = det(submatrix(nmat, IndexSubset(rows.ground(), rr), IndexSubset(cols.ground(), cc)));
    if (v == 0) continue;
    c[k - chosen] += parity % 2 ? Rational(-v) : v;
  }
  return c;
}

}  // namespace detail

/// p_{A+tB}(x) = Σ_i Σ_j (−1)^{n−i} tr(adj_{i+j}(A) C_{i+j}(xI − tB)) for any
/// square A, B. On diagonal entries the compound term reduces to C_{i+j}^j(B);
/// off the diagonal the identity only partly overlaps and the shifted minors
/// are summed directly. The adjugate is injectable so that test mutants can
/// corrupt it.
inline BivariatePoly expand_charpoly(const ExactMatrix& a, const ExactMatrix& b, const AdjugateFn& adj = adjugate_k) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
    throw DimensionError("expand_charpoly: A and B must be square of equal size");
  const std::size_t n = a.rows();
  BivariatePoly out;
  for (std::size_t k = 0; k <= n; ++k) {
    const LabeledMatrix adj_k = adj(a, static_cast<long>(k));
    for (std::size_t ai = 0; ai < adj_k.rows(); ++ai)
      for (std::size_t bi = 0; bi < adj_k.cols(); ++bi) {
        const Rational& w = adj_k.body(ai, bi);
        if (w == 0) continue;
        if (ai != bi) {
          // tr(adj · C) pairs adj(α, β) with the (β, α) compound entry.
          const auto c = detail::shifted_minor_coefficients(b, adj_k.col_labels[bi], adj_k.row_labels[ai]);
          for (std::size_t j = 1; j <= k; ++j) {
            if (c[j] == 0) continue;
            const std::size_t i = k - j;
            Rational v = w * c[j];
            if ((n - i) % 2) v = -v;
            out.add_term({static_cast<long>(j), static_cast<long>(i)}, v);
          }
          continue;
        }
        const ExactMatrix sub = submatrix(b, adj_k.row_labels[ai], adj_k.col_labels[bi]);
        for (std::size_t j = 0; j <= k; ++j) {
          const std::size_t i = k - j;
          Rational v = w * principal_minor_sum(sub, j);
          if ((n - i) % 2) v = -v;
          out.add_term({static_cast<long>(j), static_cast<long>(i)}, v);
        }
      }
  }
  return out;
}

inline BivariatePoly expand_charpoly(const PerturbedPencil& pencil, const AdjugateFn& adj = adjugate_k) {
  return expand_charpoly(pencil.A(), pencil.B(), adj);
}

/// det(xI − A − tB) by Laplace expansion over Q[t, x], memoized on the set of
/// remaining columns. Refuses n > 8.
inline BivariatePoly brute_force_charpoly(const ExactMatrix& a, const ExactMatrix& b) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
    throw DimensionError("brute_force_charpoly: A and B must be square of equal size");
  const std::size_t n = a.rows();
  if (n > 8) throw DomainError("brute_force_charpoly: n = " + std::to_string(n) + " exceeds the oracle cap of 8");
  std::vector<BivariatePoly> entry(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto& e = entry[i * n + j];
      if (i == j) e.add_term({0, 1}, 1);
      e.add_term({0, 0}, -a(i, j));
      e.add_term({1, 0}, -b(i, j));
    }
  std::unordered_map<std::uint32_t, BivariatePoly> memo;
  std::function<BivariatePoly(std::uint32_t)> minor = [&](std::uint32_t cols) -> BivariatePoly {
    if (cols == 0) return BivariatePoly::term(1, 0, 0);
    if (auto it = memo.find(cols); it != memo.end()) return it->second;
    const std::size_t row = n - static_cast<std::size_t>(__builtin_popcount(cols));
    BivariatePoly acc;
    int position = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!(cols & (1u << c))) continue;
      const auto& e = entry[row * n + c];
      if (!e.is_zero()) {
        BivariatePoly term = e * minor(cols & ~(1u << c));
        acc = position % 2 ? acc - term : acc + term;
      }
      ++position;
    }
    memo.emplace(cols, acc);
    return acc;
  };
  return minor(n == 0 ? 0u : static_cast<std::uint32_t>((1u << n) - 1));
}

/// det(xI − A) by the Faddeev–LeVerrier recurrence.
inline UniPoly univariate_charpoly(const ExactMatrix& a) {
  if (!a.is_square()) throw DimensionError("univariate_charpoly: matrix is not square");
  const std::size_t n = a.rows();
  std::vector<Rational> c(n + 1);
  c[n] = 1;
  ExactMatrix mk(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    ExactMatrix next = a * mk;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    mk = std::move(next);
    c[n - k] = -(a * mk).trace() / static_cast<unsigned long>(k);
  }
  return UniPoly(std::move(c));
}

/// γ ∈ D_0 = {0 ≤ γ1 ≤ n, m ≤ γ1 + γ2 ≤ n}, with γ2 ≥ 0.
inline bool in_D0(Exponent g, std::size_t n, std::size_t m) {
  const long nn = static_cast<long>(n), mm = static_cast<long>(m);
  return g.t >= 0 && g.x >= 0 && g.t <= nn && g.t + g.x >= mm && g.t + g.x <= nn;
}

/// E1: γ = (0, n−η). E2: γ = (η, m−η), 1 ≤ η ≤ r. E3: γ = (r+2μ, m−r−μ).
/// BelowE3: the zero region (r, m−r) + η(1,−1) + μ(2,−1), η ≥ 1.
enum class EdgeTag { E1, E2, E3, BelowE3 };

inline const char* to_string(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::E1: return "E1";
    case EdgeTag::E2: return "E2";
    case EdgeTag::E3: return "E3";
    case EdgeTag::BelowE3: return "below-E3";
  }
  return "?";
}

struct EdgeCoefficientReport {
  Exponent gamma;
  Rational formula_value;
  Rational expansion_value;
  EdgeTag edge_tag = EdgeTag::E1;

  bool agrees() const { return formula_value == expansion_value; }
};

namespace detail {

inline std::size_t e3_length(const PerturbedPencil& pc) { return std::min(pc.m() - pc.r(), pc.n() - pc.m()); }

/// (tag, η, μ) for γ, or nothing if γ is outside the cases.
struct CaseHit {
  EdgeTag tag;
  long eta;
  long mu;
};

inline std::optional<CaseHit> locate_case(const PerturbedPencil& pc, Exponent g) {
  const long n = static_cast<long>(pc.n()), m = static_cast<long>(pc.m()), r = static_cast<long>(pc.r());
  const long len = static_cast<long>(e3_length(pc));
  if (g.t == 0 && g.x >= m && g.x <= n) return CaseHit{EdgeTag::E1, n - g.x, 0};
  if (g.t + g.x == m && g.t >= 1 && g.t <= r) return CaseHit{EdgeTag::E2, g.t, 0};
  if (g.t >= r && (g.t - r) % 2 == 0) {
    const long mu = (g.t - r) / 2;
    if (mu >= 1 && mu <= len && g.x == m - r - mu) return CaseHit{EdgeTag::E3, 0, mu};
  }
  const long mu = g.t + g.x - m;
  const long eta = m - r - g.x - mu;
  if (mu >= 0 && mu <= len - 1 && eta >= 1 && eta <= m - r - mu && g.x >= 0) return CaseHit{EdgeTag::BelowE3, eta, mu};
  return std::nullopt;
}

}  // namespace detail

/// Closed-form value of d_γ for γ in one of the four cases. For E3 the value is
///   (−1)^{n−m+r} u_1⋯u_r Σ_{K ⊂ [n−m], |K| = μ} Π_{k∉K} p_k Σ_{(r+μ)}|b_K c_1 ⋯ c_r|²
/// with b_k the k-th column of B21.
inline Rational edge_formula(const PerturbedPencil& pc, Exponent g, EdgeTag* tag_out = nullptr) {
  const auto hit = detail::locate_case(pc, g);
  if (!hit) {
    const char* region = in_D0(g, pc.n(), pc.m()) ? "inside D0 but above the edges E1-E3 and the zero region"
                                                  : "outside D0";
    throw DomainError("edge_coefficient: gamma = (" + std::to_string(g.t) + ", " + std::to_string(g.x) + ") is " +
                      region);
  }
  if (tag_out) *tag_out = hit->tag;
  const std::size_t n = pc.n(), m = pc.m(), r = pc.r();
  switch (hit->tag) {
    case EdgeTag::E1: {
      Rational v = principal_minor_sum(pc.A(), static_cast<std::size_t>(hit->eta));
      return hit->eta % 2 ? Rational(-v) : v;
    }
    case EdgeTag::E2: {
      Rational v = pc.p_product() * principal_minor_sum(pc.B22(), static_cast<std::size_t>(hit->eta));
      return (n - m + static_cast<std::size_t>(hit->eta)) % 2 ? Rational(-v) : v;
    }
    case EdgeTag::E3: {
      const auto mu = static_cast<std::size_t>(hit->mu);
      Rational total = 0;
      for (const auto& k_set : subsets_lex(n - m, static_cast<long>(mu))) {
        Rational weight = 1;
        for (std::size_t k = 1; k <= n - m; ++k)
          if (!k_set.contains(k)) weight *= pc.p()[k - 1];
        std::vector<std::vector<Rational>> cols;
        for (auto k : k_set.members()) cols.push_back(pc.B21().column(k - 1));
        cols.insert(cols.end(), pc.C().begin(), pc.C().end());
        total += weight * squared_minor_sum(ExactMatrix::from_columns(m, cols), r + mu);
      }
      for (const auto& uk : pc.u()) total *= uk;
      return (n - m + r) % 2 ? Rational(-total) : total;
    }
    case EdgeTag::BelowE3: return 0;
  }
  return 0;
}

inline EdgeCoefficientReport edge_coefficient(const PerturbedPencil& pc, const BivariatePoly& expansion, Exponent g) {
  EdgeCoefficientReport rep;
  rep.gamma = g;
  rep.formula_value = edge_formula(pc, g, &rep.edge_tag);
  rep.expansion_value = expansion.coefficient(g);
  return rep;
}

inline EdgeCoefficientReport edge_coefficient(const PerturbedPencil& pc, Exponent g) {
  return edge_coefficient(pc, expand_charpoly(pc), g);
}

/// Every γ covered by the four cases, in the order E1, E2, E3, below-E3.
inline std::vector<std::pair<Exponent, EdgeTag>> edge_case_points(const PerturbedPencil& pc) {
  const long n = static_cast<long>(pc.n()), m = static_cast<long>(pc.m()), r = static_cast<long>(pc.r());
  const long len = static_cast<long>(detail::e3_length(pc));
  std::vector<std::pair<Exponent, EdgeTag>> pts;
  for (long eta = 0; eta <= n - m; ++eta) pts.push_back({{0, n - eta}, EdgeTag::E1});
  for (long eta = 1; eta <= r; ++eta) pts.push_back({{eta, m - eta}, EdgeTag::E2});
  for (long mu = 1; mu <= len; ++mu) pts.push_back({{r + 2 * mu, m - r - mu}, EdgeTag::E3});
  for (long mu = 0; mu <= len - 1; ++mu)
    for (long eta = 1; eta <= m - r - mu; ++eta) pts.push_back({{r + eta + 2 * mu, m - r - eta - mu}, EdgeTag::BelowE3});
  return pts;
}

struct CascadeResult {
  bool fires = false;
  std::size_t bottom_rank = 0;
  Exponent gamma_tilde;
  std::vector<Exponent> zeros;
};

/// Degeneracy cascade at μ̃ ∈ [1, min(m−r, n−m)]. Fires iff
/// rank[B21 B22] < r + μ̃; then every γ = (r+2μ+ν, m−r−μ), μ̃ ≤ μ ≤ min,
/// 0 ≤ ν ≤ n−m−μ, is listed. Both directions of the equivalence are checked
/// against `expansion`: listed γ must be absent, and d_γ̃ must be present
/// when the predicate is false.
inline CascadeResult degeneracy_cascade(const PerturbedPencil& pc, const BivariatePoly& expansion, std::size_t mu_tilde) {
  const std::size_t len = detail::e3_length(pc);
  if (mu_tilde < 1 || mu_tilde > len)
    throw DomainError("degeneracy_cascade: mu_tilde = " + std::to_string(mu_tilde) + " outside [1, " +
                      std::to_string(len) + "]");
  const long m = static_cast<long>(pc.m()), r = static_cast<long>(pc.r()), n = static_cast<long>(pc.n());
  CascadeResult res;
  res.bottom_rank = rank(pc.bottom_rows());
  res.gamma_tilde = {r + 2 * static_cast<long>(mu_tilde), m - r - static_cast<long>(mu_tilde)};
  res.fires = res.bottom_rank < pc.r() + mu_tilde;
  auto name = [](Exponent g) { return "(" + std::to_string(g.t) + ", " + std::to_string(g.x) + ")"; };
  if (!res.fires) {
    if (!expansion.contains(res.gamma_tilde))
      throw InvariantViolation("degeneracy_cascade: rank condition does not fire yet d_" + name(res.gamma_tilde) +
                               " = 0");
    return res;
  }
  for (long mu = static_cast<long>(mu_tilde); mu <= static_cast<long>(len); ++mu)
    for (long nu = 0; nu <= n - m - mu; ++nu) {
      Exponent g{r + 2 * mu + nu, m - r - mu};
      if (expansion.contains(g))
        throw InvariantViolation("degeneracy_cascade: d_" + name(g) + " = " + to_string(expansion.coefficient(g)) +
                                 " but the cascade requires 0");
      res.zeros.push_back(g);
    }
  return res;
}

inline CascadeResult degeneracy_cascade(const PerturbedPencil& pc, std::size_t mu_tilde) {
  return degeneracy_cascade(pc, expand_charpoly(pc), mu_tilde);
}

}  // namespace psdpencil
