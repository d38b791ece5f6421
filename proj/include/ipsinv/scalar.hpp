#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace ipsinv {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an enumeration would exceed the configured state cap.
class ResourceCapExceeded : public Error {
 public:
  using Error::Error;
};

/// Absolute tolerance used by every equality test in float mode.
struct Tolerance {
  double abs = 1e-9;
};

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* mode = "exact";
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static constexpr const char* mode = "float";
};

template <class S>
inline constexpr bool is_exact_v = scalar_traits<S>::exact;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double d) { return d; }

template <class To, class From>
To scalar_cast(const From& v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else if constexpr (std::is_same_v<To, double>) {
    return to_double(v);
  } else {
    // double -> Rational is exact on the binary value.
    return Rational(v);
  }
}

inline Rational abs_value(const Rational& v) { return v < 0 ? Rational(-v) : v; }
inline double abs_value(double v) { return std::fabs(v); }

/// Exact zero test for rationals; |v| <= tol.abs * scale for doubles.
template <class S>
bool is_zero(const S& v, const Tolerance& tol = {}, double scale = 1.0) {
  if constexpr (is_exact_v<S>) {
    return v == 0;
  } else {
    return std::fabs(v) <= tol.abs * scale;
  }
}

template <class S>
bool approx_equal(const S& a, const S& b, const Tolerance& tol = {}, double scale = 1.0) {
  return is_zero<S>(a - b, tol, scale);
}

inline std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

inline std::string to_string(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

/// Decimal digits only; a leading zero would otherwise select octal.
inline Integer decimal_integer(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return Integer{std::string(s)};
}

inline Integer parse_integer(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw Error("not an integer: '" + std::string(s) + "'");
  Integer v = decimal_integer(s);
  return neg ? Integer(-v) : v;
}

}  // namespace detail

/// Parses "p/q", "n", or a plain decimal such as "-0.125" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw Error("empty number");
  try {
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      Integer p = detail::parse_integer(s.substr(0, slash));
      Integer q = detail::parse_integer(s.substr(slash + 1));
      if (q == 0) throw Error("zero denominator");
      return Rational(p, q);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      bool neg = s[0] == '-';
      std::string_view body = (s[0] == '-' || s[0] == '+') ? s.substr(1) : s;
      dot = body.find('.');
      std::string_view ip = body.substr(0, dot), fp = body.substr(dot + 1);
      if ((ip.empty() && fp.empty()) || (!ip.empty() && !detail::all_digits(ip)) ||
          (!fp.empty() && !detail::all_digits(fp)))
        throw Error("bad decimal");
      Integer num = detail::decimal_integer(std::string(ip.empty() ? "0" : ip) + std::string(fp));
      Integer den = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(fp.size()));
      Rational r(num, den);
      return neg ? Rational(-r) : r;
    }
    return Rational(detail::parse_integer(s));
  } catch (const Error&) {
    throw Error("cannot parse number '" + std::string(text) + "'");
  } catch (const std::exception&) {
    throw Error("cannot parse number '" + std::string(text) + "'");
  }
}

/// Best rational approximation with denominator <= max_den (continued fractions).
inline Rational best_rational_approximation(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) throw Error("non-finite value");
  bool neg = x < 0;
  double v = std::fabs(x);
  Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = v;
  for (int it = 0; it < 64; ++it) {
    double a_d = std::floor(r);
    Integer a(static_cast<long long>(a_d));
    Integer p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) {
      // Semiconvergent check against the last convergent.
      Integer k = (Integer(max_den) - q0) / q1;
      Integer ps = k * p1 + p0, qs = k * q1 + q0;
      Rational c1(p1, q1), cs(ps, qs);
      Rational target(v);
      Rational best = abs_value(Rational(cs - target)) < abs_value(Rational(c1 - target)) ? cs : c1;
      return neg ? Rational(-best) : best;
    }
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double frac = r - a_d;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
    if (r > 1e18) break;
  }
  Rational res(p1, q1);
  return neg ? Rational(-res) : res;
}

namespace detail {

inline std::optional<Integer> exact_integer_root(const Integer& v, unsigned k) {
  if (v < 0) return std::nullopt;
  Integer r;
  int exact = mpz_root(r.backend().data(), v.backend().data(), k);
  if (!exact) return std::nullopt;
  return r;
}

}  // namespace detail

/// Cube root when the radicand is the cube of a nonnegative rational.
inline std::optional<Rational> exact_cube_root(const Rational& v) {
  if (v < 0) return std::nullopt;
  auto p = detail::exact_integer_root(numerator(v), 3);
  auto q = detail::exact_integer_root(denominator(v), 3);
  if (!p || !q) return std::nullopt;
  return Rational(*p, *q);
}

inline std::optional<Rational> exact_sqrt(const Rational& v) {
  if (v < 0) return std::nullopt;
  auto p = detail::exact_integer_root(numerator(v), 2);
  auto q = detail::exact_integer_root(denominator(v), 2);
  if (!p || !q) return std::nullopt;
  return Rational(*p, *q);
}

}  // namespace ipsinv
