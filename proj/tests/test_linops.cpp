#include <doctest.h>

#include <cmath>
#include <random>

#include "amix/linops.hpp"
#include "oracles.hpp"

using namespace amix;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

DenseMatrix<double> sym_from(std::initializer_list<std::initializer_list<double>> rows) {
  int n = static_cast<int>(rows.size());
  DenseMatrix<double> m(n, n);
  int r = 0;
  for (auto row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

double min_eigen(const DenseMatrix<double>& m) {
  auto e = symmetric_eigen(m);
  return *std::min_element(e.values.begin(), e.values.end());
}

double max_eigen(const DenseMatrix<double>& m) {
  auto e = symmetric_eigen(m);
  return *std::max_element(e.values.begin(), e.values.end());
}

}  // namespace

TEST_CASE("apply_operator hand cases") {
  auto p = make_problem<double>({2});
  SymMatrix<double> off(2);
  off.add(0, 1, 1.0);
  p.constraints.push_back({{{0, off}}});
  SymMatrix<double> eye(2);
  eye.add(0, 0, 1.0);
  eye.add(1, 1, 1.0);
  p.constraints.push_back({{{0, eye}}});
  p.rhs = {0.0, 0.0};
  p.ineq_start = 3;
  Factors<double> v{DenseMatrix<double>(1, 2)};
  v[0](0, 0) = 1.0;
  v[0](0, 1) = 1.0;
  auto vals = apply_operator(p, v);
  CHECK(vals[0] == 2.0);
  CHECK(vals[1] == doctest::Approx(v[0].frobenius_norm() * v[0].frobenius_norm()));
}

TEST_CASE("apply_operator matches the dense oracle on 1000 random pairs") {
  std::mt19937_64 rng(11);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    auto p = oracle::random_problem(rng, {1 + t % 5, 1 + t % 3}, 2, 1, 0.5);
    auto v = oracle::random_factors(p, rng);
    auto fast = apply_operator(p, v);
    auto slow = oracle::apply_dense(p, v);
    for (std::size_t j = 0; j < fast.size(); ++j) bad += std::abs(fast[j] - slow[j]) > 1e-12 * (1.0 + std::abs(slow[j]));
    bad += rel_err(cost_value(p, v), oracle::cost_dense(p, v)) > 1e-12;
  }
  CHECK(bad == 0);
}

TEST_CASE("apply_operator rejects shape mismatch") {
  std::mt19937_64 rng(1);
  auto p = oracle::random_problem(rng, {3}, 1, 0, 1.0);
  Factors<double> v{DenseMatrix<double>(2, 4)};
  CHECK_THROWS(apply_operator(p, v));
}

TEST_CASE("apply_adjoint") {
  std::mt19937_64 rng(12);
  auto p = oracle::random_problem(rng, {3, 2}, 2, 1, 0.7);
  std::vector<double> zero(3, 0.0);
  for (const auto& m : apply_adjoint(p, std::span<const double>(zero))) CHECK(m.frobenius_norm() == 0.0);
  std::vector<double> y{0.3, -1.2, 2.0};
  auto adj = apply_adjoint(p, std::span<const double>(y));
  for (int b = 0; b < 2; ++b) {
    std::vector<std::vector<double>> ref(p.block_sizes[b], std::vector<double>(p.block_sizes[b], 0.0));
    for (int j = 0; j < 3; ++j) {
      for (const auto& t : p.constraints[j].terms) {
        if (t.block != b) continue;
        auto d = oracle::dense(t.matrix);
        for (std::size_t r = 0; r < d.size(); ++r) {
          for (std::size_t c = 0; c < d.size(); ++c) ref[r][c] += y[j] * d[r][c];
        }
      }
    }
    for (int r = 0; r < p.block_sizes[b]; ++r) {
      for (int c = 0; c < p.block_sizes[b]; ++c) CHECK(adj[b](r, c) == doctest::Approx(ref[r][c]));
    }
  }
  std::vector<double> wrong(2, 1.0);
  CHECK_THROWS(apply_adjoint(p, std::span<const double>(wrong)));
}

TEST_CASE("column slices reassemble the constraints") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    auto p = oracle::random_problem(rng, {5, 3}, 3, 2, 0.4);
    ColumnSlices<double> slices(p);
    for (int b = 0; b < p.num_blocks(); ++b) {
      auto parts = slices.reassemble(b);
      for (int j = 0; j < p.num_constraints(); ++j) {
        const SymMatrix<double>* orig = nullptr;
        for (const auto& term : p.constraints[j].terms) {
          if (term.block == b) orig = &term.matrix;
        }
        if (!orig) {
          CHECK(parts.count(j) == 0);
          continue;
        }
        CHECK(oracle::dense(parts.at(j)) == oracle::dense(*orig));
      }
    }
  }
}

TEST_CASE("incremental operator values") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 1.0);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    auto p = oracle::random_problem(rng, {1 + t % 6, 2}, 3, 2, 0.5);
    auto v = oracle::random_factors(p, rng);
    ColumnSlices<double> slices(p);
    auto cache = compute_cache(p, v);
    int b = t % 2;
    int i = static_cast<int>(rng() % static_cast<unsigned>(p.block_sizes[b]));
    auto col = v[b].col(i);
    std::vector<double> start(col.begin(), col.end()), trial(start);
    for (auto& x : trial) x += g(rng);
    auto inc = incremental_operator_values(cache, slices, v, b, i, std::span<const double>(start),
                                           std::span<const double>(trial));
    std::copy(trial.begin(), trial.end(), col.begin());
    auto direct = apply_operator(p, v);
    for (std::size_t j = 0; j < inc.size(); ++j) bad += rel_err(inc[j], direct[j]) > 1e-12;
  }
  CHECK(bad == 0);
}

TEST_CASE("incremental update with no change and diagonal-only constraints") {
  std::mt19937_64 rng(15);
  auto p = make_problem<double>({3});
  SymMatrix<double> d(3);
  d.add(0, 0, 2.0);
  d.add(2, 2, -1.0);
  p.constraints.push_back({{{0, d}}});
  p.rhs = {1.0};
  p.ineq_start = 2;
  auto v = oracle::random_factors(p, rng);
  ColumnSlices<double> slices(p);
  auto cache = compute_cache(p, v);
  auto col = v[0].col(0);
  std::vector<double> start(col.begin(), col.end());
  auto same = incremental_operator_values(cache, slices, v, 0, 0, std::span<const double>(start),
                                          std::span<const double>(start));
  CHECK(same == cache.values);
  std::vector<double> trial(start);
  for (auto& x : trial) x *= 2.0;
  double sq_old = 0.0;
  for (double x : start) sq_old += x * x;
  auto moved = incremental_operator_values(cache, slices, v, 0, 0, std::span<const double>(start),
                                           std::span<const double>(trial));
  CHECK(moved[0] == doctest::Approx(cache.values[0] + 2.0 * 3.0 * sq_old));
}

TEST_CASE("project_psd examples") {
  auto m = sym_from({{0.0, 1.0}, {1.0, 0.0}});
  auto z = project_psd(m);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) CHECK(z(r, c) == doctest::Approx(0.5).epsilon(1e-14));
  }
  auto neg = sym_from({{-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, -1.0}});
  CHECK(project_psd(neg).frobenius_norm() == 0.0);
  auto psd = sym_from({{2.0, 1.0}, {1.0, 2.0}});
  auto same = project_psd(psd);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) CHECK(std::abs(same(r, c) - psd(r, c)) <= 1e-12);
  }
}

TEST_CASE("project_psd optimality on random matrices") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    int n = 1 + t % 12;
    DenseMatrix<double> m(n, n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r <= c; ++r) m(r, c) = m(c, r) = u(rng);
    }
    auto z = project_psd(m);
    double fro = m.frobenius_norm();
    DenseMatrix<double> diff(n, n);
    double inner = 0.0;
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) {
        diff(r, c) = z(r, c) - m(r, c);
        inner += z(r, c) * diff(r, c);
      }
    }
    CHECK(min_eigen(z) >= -1e-12 * fro);
    CHECK(min_eigen(diff) >= -1e-12 * fro);
    CHECK(std::abs(inner) <= 1e-10 * fro * fro);
  }
}

TEST_CASE("eigensolver works at double-double") {
  DenseMatrix<DoubleDouble> m(3, 3);
  double vals[3][3] = {{4, 1, 0.5}, {1, 3, -1}, {0.5, -1, 2}};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = DoubleDouble(vals[r][c]);
  }
  auto e = symmetric_eigen(m);
  // A u = lambda u to double-double accuracy
  for (int l = 0; l < 3; ++l) {
    for (int r = 0; r < 3; ++r) {
      DoubleDouble s(0.0);
      for (int c = 0; c < 3; ++c) s += m(r, c) * e.vectors(c, l);
      CHECK(std::abs(static_cast<double>(s - e.values[l] * e.vectors(r, l))) < 1e-29);
    }
  }
}
