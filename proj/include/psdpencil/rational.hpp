#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "psdpencil/errors.hpp"

namespace psdpencil {

/// Arbitrary-precision rational. GMP keeps every value in lowest terms with
/// a positive denominator, so equality is structural.
using Rational = mpq_class;
using Integer = mpz_class;

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

inline int sign(const Rational& q) { return sgn(q); }

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

inline Integer pow10(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

}  // namespace detail

/// Parses "p", "p/q" and plain decimals such as "-0.25" or "1e-3" into an
/// exact rational. Decimals are read digit-for-digit, not through a double.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { return ParseError("not a rational literal: '" + std::string(text) + "'"); };
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw fail();

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den)) throw fail();
    Integer d(std::string(den), 10);
    if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    value = Rational(Integer(std::string(num), 10), d);
    value.canonicalize();
  } else {
    std::string_view mantissa = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = s.substr(0, e);
      auto exp_text = s.substr(e + 1);
      bool exp_neg = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_neg = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!detail::all_digits(exp_text) || exp_text.size() > 6) throw fail();
      exponent = std::stol(std::string(exp_text));
      if (exp_neg) exponent = -exponent;
    }
    std::string digits;
    long frac_len = 0;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
      auto ip = mantissa.substr(0, dot);
      auto fp = mantissa.substr(dot + 1);
      if ((!ip.empty() && !detail::all_digits(ip)) || (!fp.empty() && !detail::all_digits(fp)) ||
          (ip.empty() && fp.empty()))
        throw fail();
      digits = std::string(ip) + std::string(fp);
      frac_len = static_cast<long>(fp.size());
    } else {
      if (!detail::all_digits(mantissa)) throw fail();
      digits = std::string(mantissa);
    }
    long shift = exponent - frac_len;
    Integer num(digits, 10);
    if (shift >= 0) {
      value = Rational(num * detail::pow10(static_cast<unsigned long>(shift)));
    } else {
      value = Rational(num, detail::pow10(static_cast<unsigned long>(-shift)));
      value.canonicalize();
    }
  }
  return negative ? Rational(-value) : value;
}

/// Exact value of a finite double (a dyadic rational).
inline Rational exact_from_double(double x) {
  if (!std::isfinite(x)) throw DomainError("cannot convert a non-finite double to a rational");
  return Rational(x);
}

/// Closest rational to x whose denominator does not exceed max_den
/// (continued-fraction best approximation).
inline Rational rationalize(double x, std::uint64_t max_den) {
  if (max_den == 0) throw DomainError("rationalize: max_den must be positive");
  Rational target = exact_from_double(x);
  if (target.get_den() <= max_den) return target;

  Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Integer n = target.get_num(), d = target.get_den();
  const Integer bound(std::to_string(max_den), 10);
  while (true) {
    Integer a;
    mpz_fdiv_q(a.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    Integer q2 = q0 + a * q1;
    if (q2 > bound) break;
    Integer p_next = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p_next;
    q1 = q2;
    Integer rem = n - a * d;
    n = d;
    d = rem;
    if (d == 0) break;
  }
  Integer k = (bound - q0) / q1;
  Rational lower(p0 + k * p1, q0 + k * q1);
  Rational upper(p1, q1);
  lower.canonicalize();
  upper.canonicalize();
  Rational dl = abs(lower - target);
  Rational du = abs(upper - target);
  return du <= dl ? upper : lower;
}

}  // namespace psdpencil
