#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <string_view>

#include "amix/double_double.hpp"

namespace amix {

enum class ScalarKind { binary64, double_double };

std::string_view kind_name(ScalarKind kind);
ScalarKind parse_kind(std::string_view name);  // "double" | "dd"

/// Unit roundoff of a kind.
double kind_epsilon(ScalarKind kind);

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr ScalarKind kind = ScalarKind::binary64;
  static std::string format(double x);
  static double parse(std::string_view text);
};

template <>
struct ScalarTraits<DoubleDouble> {
  static constexpr ScalarKind kind = ScalarKind::double_double;
  static std::string format(DoubleDouble x) { return to_string(x, 34); }
  static DoubleDouble parse(std::string_view text) { return parse_double_double(text); }
};

template <class T>
concept Scalar = requires { ScalarTraits<T>::kind; };

// Uniform spellings so generic kernels work for both kinds through ADL.
inline double abs_value(double x) { return std::fabs(x); }
inline DoubleDouble abs_value(DoubleDouble x) { return abs(x); }
inline double square_root(double x) { return std::sqrt(x); }
inline DoubleDouble square_root(DoubleDouble x) { return sqrt(x); }
inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(DoubleDouble x) { return isfinite(x); }
inline double to_double(double x) { return x; }
inline double to_double(DoubleDouble x) { return x.hi(); }

template <class T>
T max_of(T a, T b) {
  return a < b ? b : a;
}

template <class T>
T positive_part(T x) {
  return x > T(0.0) ? x : T(0.0);
}

template <class T>
T infinity() {
  return std::numeric_limits<T>::infinity();
}

/// Converts between kinds; widening is exact, narrowing rounds to binary64.
template <class To, class From>
To convert_scalar(From x) {
  if constexpr (std::same_as<To, From>) {
    return x;
  } else if constexpr (std::same_as<To, double>) {
    return to_double(x);
  } else {
    return To(x);
  }
}

}  // namespace amix
