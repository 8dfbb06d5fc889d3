#include "amix/scalar.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace amix {

namespace {

DoubleDouble power_of_ten(int exponent) {
  DoubleDouble result(1.0);
  DoubleDouble base(10.0);
  int e = exponent < 0 ? -exponent : exponent;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return exponent < 0 ? DoubleDouble(1.0) / result : result;
}

// Multiplies by 10^exponent in two halves so intermediate powers stay finite.
DoubleDouble scale_by_ten(DoubleDouble x, int exponent) {
  if (exponent > 280 || exponent < -280) {
    int half = exponent / 2;
    return scale_by_ten(scale_by_ten(x, half), exponent - half);
  }
  return exponent >= 0 ? x * power_of_ten(exponent) : x / power_of_ten(-exponent);
}

}  // namespace

std::string to_string(DoubleDouble x, int digits) {
  if (std::isnan(x.hi())) return "nan";
  if (std::isinf(x.hi())) return x.hi() > 0 ? "inf" : "-inf";
  if (x.hi() == 0.0) return "0";
  if (digits < 1) digits = 1;

  std::string out;
  if (x.hi() < 0.0) {
    out.push_back('-');
    x = -x;
  }
  int exponent = static_cast<int>(std::floor(std::log10(x.hi())));
  DoubleDouble r = scale_by_ten(x, -exponent);
  while (r >= DoubleDouble(10.0)) {
    r /= DoubleDouble(10.0);
    ++exponent;
  }
  while (r < DoubleDouble(1.0)) {
    r *= DoubleDouble(10.0);
    --exponent;
  }

  std::vector<int> d(static_cast<std::size_t>(digits) + 1);
  for (auto& digit : d) {
    int v = static_cast<int>(floor(r).hi());
    v = v < 0 ? 0 : (v > 9 ? 9 : v);
    digit = v;
    r = (r - DoubleDouble(v)) * DoubleDouble(10.0);
  }
  // Round half up on the guard digit.
  if (d.back() >= 5) {
    int i = digits - 1;
    for (; i >= 0; --i) {
      if (++d[static_cast<std::size_t>(i)] < 10) break;
      d[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) {
      d.insert(d.begin(), 1);
      ++exponent;
    }
  }
  d.resize(static_cast<std::size_t>(digits));

  out.push_back(static_cast<char>('0' + d[0]));
  if (digits > 1) {
    out.push_back('.');
    for (std::size_t i = 1; i < d.size(); ++i) out.push_back(static_cast<char>('0' + d[i]));
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "e%+03d", exponent);
  out += buf;
  return out;
}

DoubleDouble parse_double_double(std::string_view text) {
  std::size_t pos = 0;
  auto fail = [&]() -> DoubleDouble {
    throw std::invalid_argument("invalid number '" + std::string(text) + "'");
  };
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string_view rest = text.substr(pos);
  if (rest == "inf" || rest == "infinity") {
    double v = std::numeric_limits<double>::infinity();
    return negative ? DoubleDouble(-v) : DoubleDouble(v);
  }
  if (rest == "nan") return DoubleDouble(std::numeric_limits<double>::quiet_NaN());

  DoubleDouble mantissa(0.0);
  int exponent = 0;
  int significant = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c == '.') {
      if (seen_point) return fail();
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) break;
    any_digit = true;
    int digit = c - '0';
    if (significant < 40) {
      mantissa = mantissa * DoubleDouble(10.0) + DoubleDouble(digit);
      if (mantissa.hi() != 0.0) ++significant;
      if (seen_point) --exponent;
    } else if (!seen_point) {
      ++exponent;
    }
  }
  if (!any_digit) return fail();
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    int e = 0;
    bool exp_digit = false;
    for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      exp_digit = true;
      if (e < 100000) e = e * 10 + (text[pos] - '0');
    }
    if (!exp_digit) return fail();
    exponent += exp_negative ? -e : e;
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) return fail();

  DoubleDouble value = mantissa.hi() == 0.0 ? mantissa : scale_by_ten(mantissa, exponent);
  return negative ? -value : value;
}

std::string_view kind_name(ScalarKind kind) {
  return kind == ScalarKind::binary64 ? "double" : "dd";
}

ScalarKind parse_kind(std::string_view name) {
  if (name == "double" || name == "binary64") return ScalarKind::binary64;
  if (name == "dd" || name == "double-double") return ScalarKind::double_double;
  throw std::invalid_argument("unknown precision '" + std::string(name) + "'");
}

double kind_epsilon(ScalarKind kind) {
  return kind == ScalarKind::binary64 ? std::numeric_limits<double>::epsilon()
                                      : std::numeric_limits<DoubleDouble>::epsilon().hi();
}

std::string ScalarTraits<double>::format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double ScalarTraits<double>::parse(std::string_view text) {
  std::string s(text);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (s.empty() || end == s.c_str() || *end != '\0') {
    throw std::invalid_argument("invalid number '" + s + "'");
  }
  return v;
}

}  // namespace amix
