#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "psdpencil/charpoly.hpp"
#include "psdpencil/exact_linalg.hpp"

namespace psdpencil {

/// Random instance generators. All draws go through integer_in, so the
/// sequences are a pure function of the engine seed.
using Rng = std::mt19937_64;

inline long integer_in(Rng& g, long lo, long hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<long>(g() % span);
}

inline ExactMatrix random_matrix(Rng& g, std::size_t rows, std::size_t cols, long lo, long hi) {
  ExactMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = integer_in(g, lo, hi);
  return m;
}

inline ExactMatrix random_symmetric(Rng& g, std::size_t n, long lo, long hi) {
  ExactMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = integer_in(g, lo, hi);
  return m;
}

inline std::vector<Rational> random_column(Rng& g, std::size_t n, long lo, long hi) {
  std::vector<Rational> c(n);
  for (auto& v : c) v = integer_in(g, lo, hi);
  return c;
}

/// Σ u_k c_k c_kᵀ for the given u and columns.
inline ExactMatrix gram(const std::vector<std::vector<Rational>>& c, const std::vector<Rational>& u, std::size_t m) {
  ExactMatrix s(m, m);
  for (std::size_t k = 0; k < c.size(); ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) s(i, j) += u[k] * c[k][i] * c[k][j];
  return s;
}

/// Writes the blocks into an n×n symmetric matrix with n−m leading rows.
inline ExactMatrix assemble(const ExactMatrix& b11, const ExactMatrix& b21, const ExactMatrix& b22) {
  const std::size_t k = b11.rows(), m = b22.rows(), n = k + m;
  ExactMatrix b(n, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) b(i, j) = b11(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) b(k + i, j) = b(j, k + i) = b21(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) b(k + i, k + j) = b22(i, j);
  return b;
}

inline std::vector<Rational> random_p(Rng& g, std::size_t count) {
  std::vector<Rational> p(count);
  for (auto& v : p) v = integer_in(g, 1, 5);
  return p;
}

inline bool entries_within(const ExactMatrix& m, long bound) {
  return std::all_of(m.data().begin(), m.data().end(), [&](const Rational& v) { return abs(v) <= bound; });
}

/// n ∈ [1, n_max], m ∈ [0, n−1], p_k ∈ [1, 5], entries of B in [lo, hi].
/// Half the draws make B22 low rank (rank 0, 1 or 2) and, independently,
/// half of those put the columns of B21 inside the range of B22, so the
/// edge cases E2, E3 and the below-E3 region all get exercised.
inline PerturbedPencil random_pencil(Rng& g, std::size_t n_max, long lo = -5, long hi = 5) {
  const auto n = static_cast<std::size_t>(integer_in(g, 1, static_cast<long>(n_max)));
  const auto m = static_cast<std::size_t>(integer_in(g, 0, static_cast<long>(n) - 1));
  auto p = random_p(g, n - m);
  ExactMatrix b = random_symmetric(g, n, lo, hi);
  if (m > 0 && integer_in(g, 0, 1) == 1) {
    while (true) {
      const auto r = static_cast<std::size_t>(integer_in(g, 0, std::min<long>(2, static_cast<long>(m))));
      std::vector<std::vector<Rational>> c;
      std::vector<Rational> u;
      const long cb = r == 1 ? 2 : 1;
      for (std::size_t k = 0; k < r; ++k) {
        c.push_back(random_column(g, m, -cb, cb));
        u.push_back(integer_in(g, 0, 1) ? 1 : -1);
      }
      ExactMatrix b22 = gram(c, u, m);
      ExactMatrix b21 = submatrix(b, IndexSubset::range(n, n - m + 1, n), IndexSubset::range(n, 1, n - m));
      if (r > 0 && integer_in(g, 0, 1) == 1) {
        for (std::size_t j = 0; j < n - m; ++j) {
          std::vector<Rational> col(m);
          for (std::size_t k = 0; k < r; ++k) {
            const long x = integer_in(g, -1, 1);
            for (std::size_t i = 0; i < m; ++i) col[i] += x * c[k][i];
          }
          for (std::size_t i = 0; i < m; ++i) b21(i, j) = col[i];
        }
      }
      ExactMatrix candidate = assemble(submatrix(b, IndexSubset::range(n, 1, n - m)), b21, b22);
      if (entries_within(candidate, std::max(std::abs(lo), std::abs(hi)))) {
        b = std::move(candidate);
        break;
      }
    }
  }
  return PerturbedPencil(std::move(p), std::move(b));
}

/// A pencil with rank B22 = r and rank[B21 B22] = r + s exactly.
struct StructuredPencil {
  PerturbedPencil pencil;
  std::size_t mu_tilde = 0;
};

/// B22 = C D Cᵀ of rank r with D = diag(u), u_k ∈ sign_u·[1, 2] (sign_u = 0
/// mixes signs), and B21 = C X + W Y where W adds exactly `extra` directions
/// outside range(C). Sizes require extra ≤ min(m − r, n − m).
inline PerturbedPencil structured_pencil(Rng& g, std::size_t n, std::size_t m, std::size_t r, std::size_t extra,
                                         int sign_u = 0, long lo = -3, long hi = 3) {
  while (true) {
    std::vector<std::vector<Rational>> c;
    std::vector<Rational> u;
    for (std::size_t k = 0; k < r; ++k) {
      c.push_back(random_column(g, m, -2, 2));
      long mag = integer_in(g, 1, 2);
      long sg = sign_u != 0 ? sign_u : (k % 2 == 0 ? 1 : -1);
      if (sign_u == 0 && k >= 2 && integer_in(g, 0, 1)) sg = -sg;
      u.push_back(Rational(sg * mag));
    }
    const ExactMatrix b22 = gram(c, u, m);
    std::vector<std::vector<Rational>> w;
    for (std::size_t k = 0; k < extra; ++k) w.push_back(random_column(g, m, -2, 2));
    ExactMatrix b21(m, n - m);
    for (std::size_t j = 0; j < n - m; ++j) {
      std::vector<Rational> col(m);
      for (std::size_t k = 0; k < r; ++k) {
        const long x = integer_in(g, -1, 1);
        for (std::size_t i = 0; i < m; ++i) col[i] += x * c[k][i];
      }
      // Column j < extra carries direction w_j, so all extra directions appear.
      for (std::size_t k = 0; k < extra; ++k) {
        const long y = k == j ? 1 : (j >= extra ? integer_in(g, -1, 1) : 0);
        for (std::size_t i = 0; i < m; ++i) col[i] += y * w[k][i];
      }
      for (std::size_t i = 0; i < m; ++i) b21(i, j) = col[i];
    }
    const ExactMatrix b11 = random_symmetric(g, n - m, lo, hi);
    if (r > 0 && rank(b22) != r) continue;
    if (rank(hcat(b21, b22)) != r + extra) continue;
    return PerturbedPencil(random_p(g, n - m), assemble(b11, b21, b22));
  }
}

/// Pencil with a chosen μ̃ in [1, min(m−r, n−m)] such that the cascade fires
/// (rank[B21 B22] = r + μ̃ − 1) or does not (rank = r + μ̃).
inline StructuredPencil cascade_pencil(Rng& g, std::size_t n_max, bool fires) {
  while (true) {
    const auto n = static_cast<std::size_t>(integer_in(g, 3, static_cast<long>(n_max)));
    const auto m = static_cast<std::size_t>(integer_in(g, 1, static_cast<long>(n) - 1));
    const auto r = static_cast<std::size_t>(integer_in(g, 0, static_cast<long>(m) - 1));
    const std::size_t len = std::min(m - r, n - m);
    if (len < 1) continue;
    const auto mu = static_cast<std::size_t>(integer_in(g, 1, static_cast<long>(len)));
    const std::size_t extra = fires ? mu - 1 : mu;
    return {structured_pencil(g, n, m, r, extra), mu};
  }
}

/// G Gᵀ with G an n×(n−m) integer matrix of full column rank.
inline ExactMatrix random_psd(Rng& g, std::size_t n, std::size_t corank, long lo = -2, long hi = 2) {
  while (true) {
    const ExactMatrix gm = random_matrix(g, n, n - corank, lo, hi);
    if (rank(gm) != n - corank) continue;
    return gm * gm.transpose();
  }
}

}  // namespace psdpencil
