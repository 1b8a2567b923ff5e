#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace pie {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

// Caller misuse: bad dimensions, wrong variable sets, malformed arguments.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A construction that is mathematically impossible for the given data.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  // Coefficients below this are dropped when canonicalizing.
  static constexpr double zero_tol = 1e-14;
  static bool is_zero(double v) { return v == 0.0; }
  static bool negligible(double v) { return std::abs(v) < zero_tol; }
  static double to_double(double v) { return v; }
  static double abs(double v) { return std::abs(v); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& v) { return v.is_zero(); }
  static bool negligible(const Rational& v) { return v.is_zero(); }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
  static Rational abs(const Rational& v) { return v < 0 ? Rational(-v) : v; }
};

template <class S>
double to_double(const S& v) {
  return ScalarTraits<S>::to_double(v);
}

template <class S>
S ipow(const S& base, int e) {
  S r(1);
  S b = base;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

// Converts between scalar types; rationals convert exactly to double's nearest
// value, doubles convert exactly to their binary rational value.
template <class To, class From>
To scalar_cast(const From& v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else if constexpr (std::is_same_v<To, double>) {
    return to_double(v);
  } else {
    return To(v);
  }
}

// Parses "12", "-0.5", "3/4", "1e-3", "2.5E+2" into an exact rational.
inline Rational parse_rational(std::string_view s) {
  auto fail = [&]() { throw UsageError("malformed number '" + std::string(s) + "'"); };
  if (s.empty()) fail();
  auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den.is_zero()) fail();
    return num / den;
  }
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  std::string digits;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!any_digit) fail();
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') fail();
    ++i;
    if (i >= s.size()) fail();
    bool eneg = false;
    if (s[i] == '+' || s[i] == '-') {
      eneg = s[i] == '-';
      ++i;
    }
    if (i >= s.size()) fail();
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') fail();
      exponent = exponent * 10 + (s[i] - '0');
      if (exponent > 4000) fail();
    }
    if (eneg) exponent = -exponent;
  }
  boost::multiprecision::mpz_int mant(digits);
  Rational r(mant);
  long shift = exponent - frac_digits;
  Rational ten(10);
  if (shift > 0) r *= ipow(ten, static_cast<int>(shift));
  if (shift < 0) r /= ipow(ten, static_cast<int>(-shift));
  return neg ? Rational(-r) : r;
}

template <class S>
S parse_scalar(std::string_view s) {
  if constexpr (std::is_same_v<S, double>) {
    return to_double(parse_rational(s));
  } else {
    return parse_rational(s);
  }
}

template <class S>
std::string format_scalar(const S& v) {
  if constexpr (std::is_same_v<S, double>) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  } else {
    return v.str();
  }
}

}  // namespace pie
