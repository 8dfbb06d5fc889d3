#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <string>
#include <string_view>

namespace amix {

/// Unevaluated sum hi + lo of two binary64 values with |lo| <= ulp(hi)/2.
///
/// Arithmetic follows the classic error-free transformations (Dekker,
/// Knuth, Bailey's QD library) and gives roughly 106 bits of significand.
/// Requires round-to-nearest binary64 and a correctly rounded std::fma.
class DoubleDouble {
 public:
  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double x) : hi_(x), lo_(0.0) {}  // NOLINT: implicit widening
  constexpr DoubleDouble(int x) : hi_(static_cast<double>(x)), lo_(0.0) {}  // NOLINT
  constexpr DoubleDouble(double hi, double lo) : hi_(hi), lo_(lo) {}

  constexpr double hi() const { return hi_; }
  constexpr double lo() const { return lo_; }

  explicit constexpr operator double() const { return hi_; }

  friend DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
    auto [s1, s2] = two_sum(a.hi_, b.hi_);
    auto [t1, t2] = two_sum(a.lo_, b.lo_);
    s2 += t1;
    auto [u1, u2] = quick_two_sum(s1, s2);
    u2 += t2;
    auto [r1, r2] = quick_two_sum(u1, u2);
    return {r1, r2};
  }

  friend DoubleDouble operator-(DoubleDouble a) { return {-a.hi_, -a.lo_}; }
  friend DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

  friend DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
    auto [p1, p2] = two_prod(a.hi_, b.hi_);
    p2 += a.hi_ * b.lo_ + a.lo_ * b.hi_;
    auto [r1, r2] = quick_two_sum(p1, p2);
    return {r1, r2};
  }

  friend DoubleDouble operator/(DoubleDouble a, DoubleDouble b) {
    double q1 = a.hi_ / b.hi_;
    if (!std::isfinite(q1)) return {q1, 0.0};
    DoubleDouble r = a - b * DoubleDouble(q1);
    double q2 = r.hi_ / b.hi_;
    r = r - b * DoubleDouble(q2);
    double q3 = r.hi_ / b.hi_;
    auto [s1, s2] = quick_two_sum(q1, q2);
    return DoubleDouble(s1, s2) + DoubleDouble(q3);
  }

  DoubleDouble& operator+=(DoubleDouble b) { return *this = *this + b; }
  DoubleDouble& operator-=(DoubleDouble b) { return *this = *this - b; }
  DoubleDouble& operator*=(DoubleDouble b) { return *this = *this * b; }
  DoubleDouble& operator/=(DoubleDouble b) { return *this = *this / b; }

  friend bool operator==(DoubleDouble a, DoubleDouble b) {
    return a.hi_ == b.hi_ && a.lo_ == b.lo_;
  }
  friend std::partial_ordering operator<=>(DoubleDouble a, DoubleDouble b) {
    if (auto c = a.hi_ <=> b.hi_; c != 0) return c;
    return a.lo_ <=> b.lo_;
  }

  friend DoubleDouble abs(DoubleDouble a) { return a.hi_ < 0.0 ? -a : a; }
  friend bool isfinite(DoubleDouble a) { return std::isfinite(a.hi_) && std::isfinite(a.lo_); }
  friend DoubleDouble floor(DoubleDouble a) {
    double h = std::floor(a.hi_);
    if (h != a.hi_) return {h, 0.0};
    auto [s1, s2] = quick_two_sum(h, std::floor(a.lo_));
    return {s1, s2};
  }
  friend DoubleDouble ceil(DoubleDouble a) { return -floor(-a); }

  friend DoubleDouble sqrt(DoubleDouble a) {
    if (a.hi_ <= 0.0) return {std::sqrt(a.hi_), 0.0};
    // One Newton step on the binary64 reciprocal square root (Karp's trick).
    double x = 1.0 / std::sqrt(a.hi_);
    double ax = a.hi_ * x;
    DoubleDouble ax_dd(ax);
    DoubleDouble diff = a - ax_dd * ax_dd;
    return ax_dd + DoubleDouble(diff.hi_ * (x * 0.5));
  }

 private:
  struct Pair {
    double s;
    double e;
  };
  static Pair two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double e = (a - (s - bb)) + (b - bb);
    return {s, e};
  }
  static Pair quick_two_sum(double a, double b) {
    double s = a + b;
    double e = b - (s - a);
    return {s, e};
  }
  static Pair two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

/// Decimal rendering with `digits` significant digits (scientific notation).
std::string to_string(DoubleDouble x, int digits = 34);

/// Parses a decimal floating-point literal; throws std::invalid_argument.
DoubleDouble parse_double_double(std::string_view text);

}  // namespace amix

template <>
class std::numeric_limits<amix::DoubleDouble> {
 public:
  static constexpr bool is_specialized = true;
  static constexpr bool is_signed = true;
  static constexpr bool is_integer = false;
  static constexpr bool is_exact = false;
  static constexpr bool has_infinity = true;
  static constexpr bool has_quiet_NaN = true;
  static constexpr int digits = 106;
  static constexpr int digits10 = 31;
  static constexpr int radix = 2;
  static constexpr amix::DoubleDouble epsilon() { return {0x1p-104, 0.0}; }
  static constexpr amix::DoubleDouble min() { return {std::numeric_limits<double>::min(), 0.0}; }
  static constexpr amix::DoubleDouble max() { return {std::numeric_limits<double>::max(), 0.0}; }
  static constexpr amix::DoubleDouble lowest() { return {-std::numeric_limits<double>::max(), 0.0}; }
  static constexpr amix::DoubleDouble infinity() {
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  static constexpr amix::DoubleDouble quiet_NaN() {
    return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  }
};
