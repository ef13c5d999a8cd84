#pragma once

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blockaxioms {

using Rational = boost::rational<std::int64_t>;

/// Tolerance for "strictly higher" comparisons when either side is a float.
inline constexpr double kStrictTolerance = 1e-9;

/// Tolerance for budget-balance comparisons.
inline constexpr double kBudgetTolerance = 1e-12;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Parses "3", "-2", "0.125", "1/3". Throws std::invalid_argument on anything else.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) fail();

  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) fail();
    std::size_t pos = 0;
    bool negative = false;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      pos = 1;
    }
    if (pos == s.size()) fail();
    std::int64_t value = 0;
    for (; pos < s.size(); ++pos) {
      if (s[pos] < '0' || s[pos] > '9') fail();
      if (value > (INT64_MAX - 9) / 10) fail();
      value = value * 10 + (s[pos] - '0');
    }
    return negative ? -value : value;
  };

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t num = parse_int(text.substr(0, slash));
    std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) fail();
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 15) fail();
    bool negative = !whole.empty() && whole[0] == '-';
    std::int64_t w = (whole.empty() || whole == "-" || whole == "+") ? 0 : parse_int(whole);
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t f = parse_int(frac);
    if (frac[0] == '-' || frac[0] == '+') fail();
    Rational magnitude = Rational(w < 0 ? -w : w) + Rational(f, scale);
    return negative ? -magnitude : magnitude;
  }
  return Rational(parse_int(text));
}

/// Shortest exact text for a rational: "1/2", "3", "-5/7".
inline std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// A real value that stays an exact rational as long as every input was exact.
/// Irrational operations (square roots, non-integer powers) drop to double.
class Scalar {
 public:
  Scalar() : Scalar(Rational(0)) {}
  Scalar(const Rational& r) : approx_(to_double(r)), exact_(r) {}  // NOLINT(google-explicit-constructor)
  Scalar(std::int64_t n) : Scalar(Rational(n)) {}                  // NOLINT(google-explicit-constructor)

  static Scalar inexact(double v) {
    Scalar s;
    s.approx_ = v;
    s.exact_.reset();
    return s;
  }

  bool is_exact() const { return exact_.has_value(); }
  const Rational& exact() const { return exact_.value(); }
  double value() const { return approx_; }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return Scalar(*a.exact_ + *b.exact_);
    return inexact(a.approx_ + b.approx_);
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return Scalar(*a.exact_ - *b.exact_);
    return inexact(a.approx_ - b.approx_);
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    // 0 * anything is exactly 0.
    if (a.is_exact() && a.exact_->numerator() == 0) return a;
    if (b.is_exact() && b.exact_->numerator() == 0) return b;
    if (a.is_exact() && b.is_exact()) return Scalar(*a.exact_ * *b.exact_);
    return inexact(a.approx_ * b.approx_);
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (b.is_exact() ? b.exact_->numerator() == 0 : b.approx_ == 0.0)
      throw std::domain_error("division by zero");
    if (a.is_exact() && b.is_exact()) return Scalar(*a.exact_ / *b.exact_);
    return inexact(a.approx_ / b.approx_);
  }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }

  friend std::ostream& operator<<(std::ostream& os, const Scalar& s) {
    if (s.is_exact()) return os << format_rational(*s.exact_);
    return os << s.approx_;
  }

 private:
  double approx_;
  std::optional<Rational> exact_;
};

/// Three-way comparison. Exact when both sides are exact, otherwise equal
/// within kStrictTolerance.
inline int compare(const Scalar& a, const Scalar& b, double tolerance = kStrictTolerance) {
  if (a.is_exact() && b.is_exact()) {
    if (a.exact() < b.exact()) return -1;
    if (b.exact() < a.exact()) return 1;
    return 0;
  }
  double diff = a.value() - b.value();
  if (diff > tolerance) return 1;
  if (diff < -tolerance) return -1;
  return 0;
}

inline bool strictly_greater(const Scalar& a, const Scalar& b) { return compare(a, b) > 0; }
inline bool strictly_less(const Scalar& a, const Scalar& b) { return compare(a, b) < 0; }

inline bool is_zero(const Scalar& s) { return s.is_exact() ? s.exact().numerator() == 0 : s.value() == 0.0; }

}  // namespace blockaxioms
