#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "psdpencil/errors.hpp"
#include "psdpencil/rational.hpp"

namespace psdpencil {

/// Univariate polynomial over Q, coefficients stored lowest degree first with
/// no trailing zeros. The zero polynomial has degree -1.
class UniPoly {
 public:
  UniPoly() = default;
  explicit UniPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

  static UniPoly constant(const Rational& v) { return UniPoly({v}); }
  static UniPoly monomial(const Rational& v, std::size_t degree) {
    std::vector<Rational> c(degree + 1);
    c[degree] = v;
    return UniPoly(std::move(c));
  }

  long degree() const { return static_cast<long>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  const Rational& leading() const { return c_.back(); }

  /// Largest power of x dividing the polynomial (0 for the zero polynomial).
  std::size_t low_order() const {
    std::size_t i = 0;
    while (i < c_.size() && c_[i] == 0) ++i;
    return c_.empty() ? 0 : i;
  }

  Rational operator()(const Rational& x) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  double eval(double x) const {
    double acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->get_d();
    return acc;
  }

  UniPoly derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Rational> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<unsigned long>(i);
    return UniPoly(std::move(d));
  }

  /// Divides out xᵏ (k must not exceed low_order()).
  UniPoly shift_down(std::size_t k) const {
    if (k > low_order()) throw DomainError("shift_down: polynomial is not divisible by x^k");
    return UniPoly(std::vector<Rational>(c_.begin() + static_cast<long>(std::min(k, c_.size())), c_.end()));
  }

  UniPoly monic() const {
    if (is_zero()) return {};
    UniPoly r = *this;
    Rational lc = leading();
    for (auto& v : r.c_) v /= lc;
    return r;
  }

  friend bool operator==(const UniPoly& a, const UniPoly& b) { return a.c_ == b.c_; }

  friend UniPoly operator+(const UniPoly& a, const UniPoly& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) + b.coeff(i);
    return UniPoly(std::move(r));
  }
  friend UniPoly operator-(const UniPoly& a, const UniPoly& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) - b.coeff(i);
    return UniPoly(std::move(r));
  }
  friend UniPoly operator-(const UniPoly& a) { return UniPoly() - a; }
  friend UniPoly operator*(const UniPoly& a, const UniPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return UniPoly(std::move(r));
  }

  /// Euclidean division over Q: a = q·b + r with deg r < deg b.
  friend std::pair<UniPoly, UniPoly> divmod(const UniPoly& a, const UniPoly& b) {
    if (b.is_zero()) throw DomainError("polynomial division by zero");
    std::vector<Rational> rem = a.c_;
    const long db = b.degree();
    if (a.degree() < db) return {UniPoly(), a};
    std::vector<Rational> q(static_cast<std::size_t>(a.degree() - db + 1));
    for (long i = a.degree(); i >= db; --i) {
      Rational f = rem[static_cast<std::size_t>(i)] / b.leading();
      q[static_cast<std::size_t>(i - db)] = f;
      if (f == 0) continue;
      for (long j = 0; j <= db; ++j) rem[static_cast<std::size_t>(i - db + j)] -= f * b.c_[static_cast<std::size_t>(j)];
    }
    return {UniPoly(std::move(q)), UniPoly(std::move(rem))};
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

/// Monic greatest common divisor.
inline UniPoly gcd(UniPoly a, UniPoly b) {
  while (!b.is_zero()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

/// Square-free factorization (Yun): returns (factor, multiplicity) pairs with
/// non-constant monic factors; the product of factor^multiplicity equals
/// f up to its leading coefficient.
inline std::vector<std::pair<UniPoly, int>> squarefree_factors(const UniPoly& f) {
  std::vector<std::pair<UniPoly, int>> out;
  if (f.degree() < 1) return out;
  UniPoly fp = f.derivative();
  UniPoly a0 = gcd(f, fp);
  UniPoly b = divmod(f, a0).first;
  UniPoly c = divmod(fp, a0).first;
  UniPoly d = c - b.derivative();
  int i = 1;
  while (b.degree() >= 1) {
    UniPoly a = gcd(b, d);
    b = divmod(b, a).first;
    c = divmod(d, a).first;
    d = c - b.derivative();
    if (a.degree() >= 1) out.emplace_back(a, i);
    ++i;
  }
  return out;
}

/// A real root certified to lie in [lo, hi].
struct RealRoot {
  Rational lo;
  Rational hi;
  int multiplicity = 1;

  double value() const { return Rational((lo + hi) / 2).get_d(); }
  double error_bound() const { return Rational((hi - lo) / 2).get_d(); }
};

namespace detail {

inline std::vector<UniPoly> sturm_chain(const UniPoly& f) {
  std::vector<UniPoly> chain{f, f.derivative()};
  while (!chain.back().is_zero()) {
    auto r = divmod(chain[chain.size() - 2], chain.back()).second;
    if (r.is_zero()) break;
    chain.push_back(-r);
  }
  return chain;
}

inline int sign_changes(const std::vector<UniPoly>& chain, const Rational& x) {
  int changes = 0, last = 0;
  for (const auto& p : chain) {
    int s = sgn(p(x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace detail

/// All real roots of f with multiplicities, each isolated in an interval of
/// width at most `width`. Roots are sorted ascending. Exact arithmetic
/// throughout (Sturm sequences and bisection on rational endpoints).
inline std::vector<RealRoot> real_roots(const UniPoly& f, const Rational& width = Rational(1, Integer("1000000000000"))) {
  if (f.is_zero()) throw DomainError("real_roots of the zero polynomial");
  std::vector<RealRoot> roots;
  for (const auto& [factor, mult] : squarefree_factors(f)) {
    const auto chain = detail::sturm_chain(factor);
    Rational bound = 1;
    for (long i = 0; i < factor.degree(); ++i)
      bound = std::max(bound, Rational(abs(factor.coeff(static_cast<std::size_t>(i)) / factor.leading())));
    bound += 1;
    auto count = [&](const Rational& a, const Rational& b) {
      return detail::sign_changes(chain, a) - detail::sign_changes(chain, b);
    };
    // Roots in (lo, hi]; the Cauchy bound keeps every root strictly inside.
    std::vector<std::pair<Rational, Rational>> stack{{-bound, bound}};
    while (!stack.empty()) {
      auto [lo, hi] = stack.back();
      stack.pop_back();
      int c = count(lo, hi);
      if (c == 0) continue;
      if (c > 1) {
        Rational mid = (lo + hi) / 2;
        stack.emplace_back(mid, hi);
        stack.emplace_back(lo, mid);
        continue;
      }
      while (hi - lo > width) {
        Rational mid = (lo + hi) / 2;
        if (factor(mid) == 0) {
          lo = hi = mid;
          break;
        }
        if (count(lo, mid) == 1) hi = mid;
        else lo = mid;
      }
      if (factor(hi) == 0) lo = hi;
      roots.push_back({lo, hi, mult});
    }
  }
  std::sort(roots.begin(), roots.end(), [](const RealRoot& a, const RealRoot& b) { return a.lo < b.lo; });
  return roots;
}

/// Exponent pair γ = (t-degree, x-degree).
struct Exponent {
  long t = 0;
  long x = 0;
  friend auto operator<=>(const Exponent&, const Exponent&) = default;
};

/// Sparse polynomial in (t, x) over Q. Zero coefficients are never stored.
class BivariatePoly {
 public:
  using TermMap = std::map<Exponent, Rational>;

  BivariatePoly() = default;

  static BivariatePoly term(const Rational& c, long t_deg, long x_deg) {
    BivariatePoly p;
    p.add_term({t_deg, x_deg}, c);
    return p;
  }

  void add_term(Exponent e, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool contains(Exponent e) const { return terms_.count(e) != 0; }
  Rational coefficient(Exponent e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  long x_degree() const {
    long d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e.x);
    return d;
  }

  /// Substitutes t = t0, leaving a polynomial in x.
  UniPoly at_t(const Rational& t0) const {
    std::vector<Rational> c(static_cast<std::size_t>(std::max<long>(x_degree() + 1, 0)));
    for (const auto& [e, v] : terms_) {
      Rational tp = 1;
      for (long i = 0; i < e.t; ++i) tp *= t0;
      c[static_cast<std::size_t>(e.x)] += v * tp;
    }
    return UniPoly(std::move(c));
  }

  /// The coefficient of xᵏ as a polynomial in t.
  UniPoly x_coefficient(long k) const {
    std::vector<Rational> c;
    for (const auto& [e, v] : terms_) {
      if (e.x != k) continue;
      if (c.size() <= static_cast<std::size_t>(e.t)) c.resize(static_cast<std::size_t>(e.t) + 1);
      c[static_cast<std::size_t>(e.t)] += v;
    }
    return UniPoly(std::move(c));
  }

  friend bool operator==(const BivariatePoly& a, const BivariatePoly& b) { return a.terms_ == b.terms_; }

  friend BivariatePoly operator+(BivariatePoly a, const BivariatePoly& b) {
    for (const auto& [e, c] : b.terms_) a.add_term(e, c);
    return a;
  }
  friend BivariatePoly operator-(BivariatePoly a, const BivariatePoly& b) {
    for (const auto& [e, c] : b.terms_) a.add_term(e, -c);
    return a;
  }
  friend BivariatePoly operator*(const BivariatePoly& a, const BivariatePoly& b) {
    BivariatePoly r;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) r.add_term({ea.t + eb.t, ea.x + eb.x}, ca * cb);
    return r;
  }

 private:
  TermMap terms_;
};

}  // namespace psdpencil
