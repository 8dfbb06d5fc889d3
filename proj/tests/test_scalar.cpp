#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <random>

#include "amix/scalar.hpp"

using amix::DoubleDouble;

TEST_CASE("double-double keeps bits binary64 drops") {
  DoubleDouble one(1.0);
  DoubleDouble tiny(std::ldexp(1.0, -80));
  DoubleDouble diff = (one + tiny) - one;
  CHECK(diff == tiny);
  CHECK(diff.hi() == std::ldexp(1.0, -80));
  CHECK(diff.lo() == 0.0);
}

TEST_CASE("double-double epsilon") {
  CHECK(std::numeric_limits<DoubleDouble>::epsilon().hi() == std::ldexp(1.0, -104));
  CHECK(amix::kind_epsilon(amix::ScalarKind::double_double) == std::ldexp(1.0, -104));
  CHECK(amix::kind_epsilon(amix::ScalarKind::binary64) == std::numeric_limits<double>::epsilon());
}

TEST_CASE("double-double arithmetic identities") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    DoubleDouble a = DoubleDouble(u(rng)) + DoubleDouble(u(rng)) * DoubleDouble(1e-17);
    DoubleDouble b = DoubleDouble(u(rng)) + DoubleDouble(u(rng)) * DoubleDouble(1e-17);
    if (b == DoubleDouble(0.0)) continue;
    DoubleDouble q = a / b;
    CHECK(std::abs(static_cast<double>(q * b - a)) <= 1e-29 * (1.0 + std::abs(a.hi())));
    DoubleDouble s = sqrt(abs(a));
    CHECK(std::abs(static_cast<double>(s * s - abs(a))) <= 1e-29 * (1.0 + std::abs(a.hi())));
    CHECK(((a + b) - b - a).hi() == doctest::Approx(0.0).epsilon(1e-28));
  }
}

TEST_CASE("two thirds to 32 digits") {
  DoubleDouble x = DoubleDouble(2.0) / DoubleDouble(3.0);
  auto text = amix::to_string(x, 32);
  CHECK(text.rfind("6.666666666666666666666666666666", 0) == 0);
  DoubleDouble back = amix::parse_double_double(text);
  CHECK(std::abs(static_cast<double>(back - x)) < 1e-31);
}

TEST_CASE("double-double text round trip") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-30, 30);
  for (int t = 0; t < 300; ++t) {
    DoubleDouble x = (DoubleDouble(u(rng)) + DoubleDouble(u(rng)) * DoubleDouble(1e-16)) *
                     DoubleDouble(std::ldexp(1.0, e(rng)));
    DoubleDouble y = amix::parse_double_double(amix::to_string(x, 34));
    double rel = std::abs(static_cast<double>(y - x)) / std::abs(x.hi());
    CHECK(rel < 1e-31);
  }
  CHECK(amix::parse_double_double("0").hi() == 0.0);
  CHECK(amix::parse_double_double("-2.5e3").hi() == -2500.0);
  CHECK(!isfinite(amix::parse_double_double("inf")));
  CHECK_THROWS_AS(amix::parse_double_double("1.0x"), std::invalid_argument);
  CHECK_THROWS_AS(amix::parse_double_double(""), std::invalid_argument);
}

TEST_CASE("binary64 format is lossless") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 200; ++t) {
    double x = u(rng) * std::ldexp(1.0, t % 40 - 20);
    CHECK(amix::ScalarTraits<double>::parse(amix::ScalarTraits<double>::format(x)) == x);
  }
  CHECK_THROWS(amix::ScalarTraits<double>::parse("1.0abc"));
}

TEST_CASE("kind names") {
  CHECK(amix::parse_kind("double") == amix::ScalarKind::binary64);
  CHECK(amix::parse_kind("dd") == amix::ScalarKind::double_double);
  CHECK_THROWS(amix::parse_kind("quad"));
}
