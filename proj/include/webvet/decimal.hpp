#pragma once

// Exact decimal arithmetic for money and remediation formulas.
//
// Values are exact rationals, so sums of decimal rates never drift and
// 0.12 * 4000000 is exactly 480000. Rendering rounds half away from zero.

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "webvet/errors.hpp"

namespace webvet {

class Decimal {
 public:
  using Rational = boost::multiprecision::cpp_rational;
  using Integer = boost::multiprecision::cpp_int;

  Decimal() = default;
  Decimal(std::int64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Decimal(Rational v) : value_(std::move(v)) {}

  /// Parses `[+-]digits[.digits][e[+-]digits]`. No separators, no whitespace.
  static std::optional<Decimal> parse(std::string_view text) {
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      negative = text[i] == '-';
      ++i;
    }
    Integer digits = 0;
    int scale = 0;
    bool any_digit = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits = digits * 10 + (text[i] - '0');
      any_digit = true;
      ++i;
    }
    if (i < text.size() && text[i] == '.') {
      ++i;
      bool frac_digit = false;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        digits = digits * 10 + (text[i] - '0');
        ++scale;
        frac_digit = true;
        ++i;
      }
      any_digit = any_digit || frac_digit;
    }
    if (!any_digit) return std::nullopt;
    long exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
      ++i;
      bool exp_negative = false;
      if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        exp_negative = text[i] == '-';
        ++i;
      }
      bool exp_digit = false;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        exponent = exponent * 10 + (text[i] - '0');
        if (exponent > 400) return std::nullopt;
        exp_digit = true;
        ++i;
      }
      if (!exp_digit) return std::nullopt;
      if (exp_negative) exponent = -exponent;
    }
    if (i != text.size()) return std::nullopt;
    long net = exponent - scale;
    Rational r(digits);
    if (net > 0) {
      r *= Rational(pow10(static_cast<unsigned>(net)));
    } else if (net < 0) {
      r /= Rational(pow10(static_cast<unsigned>(-net)));
    }
    if (negative) r = -r;
    return Decimal(std::move(r));
  }

  const Rational& rational() const { return value_; }

  bool is_integer() const { return boost::multiprecision::denominator(value_) == 1; }
  bool is_zero() const { return value_ == 0; }
  int sign() const { return value_.sign(); }

  /// Rounds to `places` fractional digits, ties away from zero.
  Decimal rounded(unsigned places) const {
    Integer scale = pow10(places);
    Rational scaled = value_ * Rational(scale);
    Integer num = boost::multiprecision::numerator(scaled);
    Integer den = boost::multiprecision::denominator(scaled);
    bool negative = num < 0;
    if (negative) num = -num;
    Integer q = (num * 2 + den) / (den * 2);
    if (negative) q = -q;
    return Decimal(Rational(q, scale));
  }

  /// Fixed-point rendering with exactly `places` fractional digits.
  std::string to_fixed(unsigned places) const {
    Decimal r = rounded(places);
    Integer scale = pow10(places);
    Integer scaled = boost::multiprecision::numerator(r.value_ * Rational(scale));
    bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    std::string digits = scaled.str();
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    std::string out = negative ? "-" : "";
    out += digits.substr(0, digits.size() - places);
    if (places > 0) {
      out += '.';
      out += digits.substr(digits.size() - places);
    }
    return out;
  }

  /// Shortest exact rendering when the value terminates within `max_places`
  /// fractional digits; otherwise rounded to `max_places`. Trailing zeros trimmed.
  std::string to_plain(unsigned max_places = 12) const {
    std::string s = to_fixed(max_places);
    if (s.find('.') != std::string::npos) {
      while (s.back() == '0') s.pop_back();
      if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
  }

  double to_double() const { return value_.convert_to<double>(); }

  friend Decimal operator+(const Decimal& a, const Decimal& b) { return Decimal(a.value_ + b.value_); }
  friend Decimal operator-(const Decimal& a, const Decimal& b) { return Decimal(a.value_ - b.value_); }
  friend Decimal operator*(const Decimal& a, const Decimal& b) { return Decimal(a.value_ * b.value_); }
  friend Decimal operator/(const Decimal& a, const Decimal& b) {
    if (b.value_ == 0) throw FormulaError("division by zero");
    return Decimal(a.value_ / b.value_);
  }
  Decimal operator-() const { return Decimal(-value_); }
  Decimal& operator+=(const Decimal& o) {
    value_ += o.value_;
    return *this;
  }

  friend bool operator==(const Decimal& a, const Decimal& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Decimal& d) { return os << d.to_plain(); }

 private:
  static Integer pow10(unsigned n) {
    Integer r = 1;
    for (unsigned i = 0; i < n; ++i) r *= 10;
    return r;
  }

  Rational value_{0};
};

}  // namespace webvet
