// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "amix/auglag.hpp"
#include "amix/instances.hpp"
#include "amix/precision.hpp"
#include "amix/solver.hpp"
#include "oracles.hpp"

using namespace amix;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double reported(const Solution<double>& s, const SdpProblem<double>& p) {
  return p.orientation.sign * s.primal_objective + p.orientation.offset;
}

double max_four(const ErrorReport<double>& r) {
  return std::max({r.pinf, r.gap, r.dinf.value_or(INFINITY), r.compl_.value_or(INFINITY)});
}

// 1: max-cut on K3
Outcome maxcut_k3() {
  auto t0 = std::chrono::steady_clock::now();
  auto basic = maxcut_relaxation(Graph::complete(3), false);
  auto rb = solve(basic, SolverOptions{});
  double tb = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto tri = maxcut_relaxation(Graph::complete(3), true);
  auto rt = solve(tri, SolverOptions{});
  double tt = seconds_since(t0);

  double grid_basic = oracle::k3_grid_max(200, false);
  double grid_tri = oracle::k3_grid_max(200, true);
  double cut = oracle::k3_max_cut();
  double vb = reported(rb.solution, basic), vt = reported(rt.solution, tri);
  bool ok = std::abs(vb - 2.25) <= 1e-8 && std::abs(vt - cut) <= 1e-8 && cut == 2.0 &&
            std::abs(grid_basic - 2.25) <= 1e-2 && std::abs(grid_tri - 2.0) <= 1e-2 && tb < 1.0 &&
            tt < 1.0 && rb.solution.status == Status::tol && rt.solution.status == Status::tol;
  return {ok, fmt("basic %.12f (9/4, grid %.4f, %.3fs); triangles %.12f (max cut %.0f, grid %.4f, %.3fs)",
                  vb, grid_basic, tb, vt, cut, grid_tri, tt)};
}

// 2: theta numbers
Outcome theta() {
  auto t0 = std::chrono::steady_clock::now();
  auto value = [](const Graph& g, bool strong) {
    auto p = theta_relaxation(g, strong);
    auto r = solve(p, SolverOptions{});
    return std::pair(reported(r.solution, p), r.solution.status);
  };
  auto [k5, s1] = value(Graph::complete(5), false);
  auto [e5, s2] = value(Graph::empty(5), false);
  auto [c5, s3] = value(Graph::cycle(5), false);
  auto [c5p, s4] = value(Graph::cycle(5), true);
  double ref = oracle::theta_prime_c5();
  double total = seconds_since(t0);
  bool statuses = s1 == Status::tol && s2 == Status::tol && s3 == Status::tol && s4 == Status::tol;
  bool ok = std::abs(k5 - 1.0) <= 1e-9 && std::abs(e5 - 5.0) <= 1e-8 &&
            std::abs(c5 - std::sqrt(5.0)) <= 1e-7 && std::abs(c5p - ref) <= 1e-7 && total < 5.0 && statuses;
  return {ok, fmt("K5 %.12f, empty5 %.12f, C5 %.12f, theta'(C5) %.12f vs reference %.12f, %.2fs total", k5,
                  e5, c5, c5p, ref, total)};
}

// 3: random SDPs at tol 1e-10
Outcome random_sdps() {
  struct Case {
    const char* name;
    std::vector<int> blocks;
    int m;
    double density;
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : {Case{"rand_30_20_1.0", {30}, 20, 1.0}, Case{"rand_2x20_15_0.5", {20, 20}, 15, 0.5}}) {
    auto p = gen_random_sdp(c.blocks, c.m, c.density, 1);
    SolverOptions o;
    o.tol = 1e-10;
    o.max_iters = 100000;
    auto t0 = std::chrono::steady_clock::now();
    auto r = solve(p, o);
    double t = seconds_since(t0);
    double err = max_four(r.solution.report);
    bool this_ok = r.solution.status == Status::tol && err < 1e-8 && t < 60.0;
    ok = ok && this_ok;
    detail += fmt("%s%s: status %s, max unscaled error %.2e, %lld iterations, %.2fs", detail.empty() ? "" : "; ",
                  c.name, std::string(status_name(r.solution.status)).c_str(), err, r.solution.iterations, t);
  }
  return {ok, detail};
}

// 4: stagnation fixture
Outcome stagnation() {
  auto p = make_problem<double>({1, 1});
  p.costs[0].add(0, 0, 1.0);
  SymMatrix<double> one(1);
  one.add(0, 0, 1.0);
  p.constraints.push_back({{{0, one}, {1, one}}});
  p.constraints.push_back({{{1, one}}});
  p.rhs = {2.0, 1.0};
  p.ineq_start = 3;

  WarmStart<double> w;
  w.factors = {DenseMatrix<double>(1, 1), DenseMatrix<double>(1, 1)};
  w.factors[1](0, 0) = std::sqrt(1.5);
  w.y_eq = {2.0, -2.0};
  w.mu = 4.0;

  // gradient of the first block's column at the fixture
  LagrangianModel<double> model(p);
  IterateState<double> s;
  s.factors = w.factors;
  s.y_eq = w.y_eq;
  s.mu = w.mu;
  s.cache = compute_cache(p, s.factors);
  std::vector<double> zero{0.0};
  auto [value, grad] = column_objective_grad(model, s, 0, 0, std::span<const double>(zero));

  SolverOptions o;
  o.scaling = false;
  o.max_iters = 1;
  double worst = 0.0;
  auto state = w;
  for (int it = 0; it < 100; ++it) {
    auto r = solve(p, o, &state);
    state = r.warm_start;
    worst = std::max(worst, std::abs(state.factors[0](0, 0)));
  }
  o.max_iters = 100;
  auto straight = solve(p, o, &w);
  worst = std::max(worst, std::abs(straight.warm_start.factors[0](0, 0)));
  bool ok = worst <= 1e-12 && std::abs(grad[0]) <= 1e-12 && std::abs(value - (2.0 + w.mu / 4)) <= 1e-12;
  return {ok, fmt("max |v1| over 100 iterations %.1e, gradient %.1e, Lagrangian %.15f, y after 100 = (%.3g, %.3g)",
                  worst, std::abs(grad[0]), value, straight.warm_start.y_eq[0], straight.warm_start.y_eq[1])};
}

IterateState<double> random_state(const SdpProblem<double>& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 2.0), mu(0.5, 5.0);
  IterateState<double> s;
  s.factors = oracle::random_factors(p, rng);
  for (int j = 0; j < p.num_equalities(); ++j) s.y_eq.push_back(u(rng));
  for (int j = 0; j < p.num_inequalities(); ++j) s.y_ineq.push_back(rng() % 3 == 0 ? 0.0 : pos(rng));
  s.mu = mu(rng);
  s.cache = compute_cache(p, s.factors);
  s.prev_values = s.cache.values;
  return s;
}

// 5: gradient against central differences
Outcome gradient_fd() {
  std::mt19937_64 rng(501);
  const double h = 1e-5;
  int in_i = 0, out_i = 0, states = 0;
  double worst = 0.0;
  for (; states < 150; ++states) {
    auto p = oracle::random_problem(rng, {3 + states % 4, 2}, 2, 4, 0.6);
    LagrangianModel<double> model(p);
    auto s = random_state(p, rng);
    for (int j = p.num_equalities(); j < p.num_constraints(); ++j) {
      double t = s.y_ineq[j - p.num_equalities()] + s.mu * (p.rhs[j] - s.cache.values[j]);
      (t > 0.0 ? in_i : out_i)++;
    }
    auto g = full_gradient(model, s);
    double num = 0.0, den = 0.0;
    for (int b = 0; b < p.num_blocks(); ++b) {
      for (std::size_t e = 0; e < s.factors[b].data().size(); ++e) {
        auto probe = s;
        probe.factors[b].data()[e] += h;
        double up = oracle::auglag_dense(p, probe.factors, s.y_eq, s.y_ineq, s.mu);
        probe.factors[b].data()[e] -= 2 * h;
        double down = oracle::auglag_dense(p, probe.factors, s.y_eq, s.y_ineq, s.mu);
        double fd = (up - down) / (2 * h);
        num += (fd - g[b].data()[e]) * (fd - g[b].data()[e]);
        den += g[b].data()[e] * g[b].data()[e];
      }
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  bool ok = worst <= 1e-6 && in_i > 0 && out_i > 0 && states >= 100;
  return {ok, fmt("%d states, hinge terms in/out %d/%d, worst relative error %.2e", states, in_i, out_i, worst)};
}

// 6: incremental operator values
Outcome incremental() {
  std::mt19937_64 rng(601);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0, drift = 0.0;
  const int trials = 1200;
  for (int t = 0; t < trials; ++t) {
    auto p = oracle::random_problem(rng, {2 + t % 7, 3}, 3, 3, 0.5);
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
    auto direct = oracle::apply_dense(p, v);
    for (std::size_t j = 0; j < inc.size(); ++j) {
      worst = std::max(worst, std::abs(inc[j] - direct[j]) / (1.0 + std::abs(direct[j])));
    }
  }
  for (int t = 0; t < 20; ++t) {
    auto p = oracle::random_problem(rng, {25, 10}, 10, 10, 0.3);
    LagrangianModel<double> model(p);
    auto s = random_state(p, rng);
    for (int b = 0; b < p.num_blocks(); ++b) {
      for (int i = 0; i < p.block_sizes[b]; ++i) {
        auto c = s.factors[b].col(i);
        std::vector<double> v(c.begin(), c.end());
        for (auto& x : v) x += 0.3 * g(rng);
        commit_column(model, s, b, i, std::span<const double>(v));
      }
    }
    auto fresh = apply_operator(p, s.factors);
    for (std::size_t j = 0; j < fresh.size(); ++j) {
      drift = std::max(drift, std::abs(s.cache.values[j] - fresh[j]) / (1.0 + std::abs(fresh[j])));
    }
  }
  bool ok = worst <= 1e-12 && drift <= 1e-11;
  return {ok, fmt("%d perturbations, worst relative error %.2e; sweep drift %.2e", trials, worst, drift)};
}

// 7: penalty and dual rules
Outcome penalty_rules() {
  SolverOptions o;
  auto p = make_problem<double>({1});
  IterateState<double> s;
  auto after = [&](double ratio) {
    s.mu = 1.0;
    update_penalty(s, ratio, o);
    return s.mu;
  };
  const double up = std::nextafter(1.2, 2.0), down = std::nextafter(0.8, 0.0);
  bool branches = after(up) == 1.03 && after(down) == 1.0 / 1.03 && after(1.2) == 1.0 && after(0.8) == 1.0 &&
                  after(1.0) == 1.0 && after(INFINITY) == 1.03;

  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> u(-3.0, 3.0), mu(0.1, 10.0);
  for (int j = 0; j < 8; ++j) {
    SymMatrix<double> one(1);
    one.add(0, 0, 1.0);
    p.constraints.push_back({{{0, one}}});
    p.rhs.push_back(0.0);
  }
  p.ineq_start = 3;
  IterateState<double> f;
  f.y_eq.assign(2, 0.0);
  f.y_ineq.assign(6, 0.0);
  f.cache.values.assign(8, 0.0);
  int negatives = 0;
  for (int step = 0; step < 1000; ++step) {
    for (auto& v : f.cache.values) v = u(rng);
    for (auto& b : p.rhs) b = u(rng);
    f.mu = mu(rng);
    update_duals(f, p, 1.0);
    for (double y : f.y_ineq) negatives += y < 0.0;
  }
  bool ok = branches && negatives == 0;
  return {ok, fmt("branches at 1.2+ulp/0.8-ulp/1.2/0.8/1.0/inf %s; negative multipliers in 1000 updates: %d",
                  branches ? "exact" : "WRONG", negatives)};
}

// 8: scaling
Outcome scaling() {
  std::mt19937_64 rng(801);
  double worst_norm = 0.0, worst_rhs = 0.0, worst_fix = 0.0, worst_joint = 0.0;
  double mixed_a = 0.0, mixed_b = 0.0;
  for (int t = 0; t < 60; ++t) {
    int kind = t % 3;  // 0: equalities only, 1: inequalities only, 2: both
    auto p = oracle::random_problem(rng, {4, 3}, kind == 1 ? 0 : 3, kind == 0 ? 0 : 3, 0.6);
    auto s = scale(p);
    const auto& q = s.problem;
    double cn = q.cost_frobenius_norm();
    worst_norm = std::max(worst_norm, std::abs(cn - 1.0));
    double a2 = 0.0, b2 = 0.0;
    for (int j = 0; j < q.num_constraints(); ++j) {
      worst_norm = std::max(worst_norm, std::abs(std::sqrt(q.constraints[j].frobenius_norm_squared()) - 1.0));
      (q.is_equality(j) ? a2 : b2) += q.rhs[j] * q.rhs[j];
    }
    if (kind == 2) {
      worst_joint = std::max(worst_joint, std::abs(std::sqrt(a2 + b2) - 1.0));
      mixed_a = std::sqrt(a2);
      mixed_b = std::sqrt(b2);
    } else {
      worst_rhs = std::max(worst_rhs, std::abs(std::sqrt(kind == 0 ? a2 : b2) - 1.0));
    }
    auto twice = scale(q);
    for (int j = 0; j < q.num_constraints(); ++j) {
      worst_fix = std::max(worst_fix, std::abs(twice.problem.rhs[j] - q.rhs[j]) / std::max(1e-300, std::abs(q.rhs[j])));
      for (std::size_t tt = 0; tt < q.constraints[j].terms.size(); ++tt) {
        auto e1 = q.constraints[j].terms[tt].matrix.entries();
        auto e2 = twice.problem.constraints[j].terms[tt].matrix.entries();
        for (std::size_t e = 0; e < e1.size(); ++e) {
          worst_fix = std::max(worst_fix, std::abs(e1[e].value - e2[e].value) / std::abs(e1[e].value));
        }
      }
    }
  }
  // unscaled report against an independent recomputation on the original data
  auto p = gen_random_sdp({12}, 6, 1.0, 3);
  for (auto& b : p.rhs) b *= 7.0;
  p.costs[0].scale(5.0);
  auto r = solve(p, SolverOptions{});
  auto z = compute_z(p, std::span<const double>(r.solution.y));
  auto x = r.solution.x();
  std::span<const double> y(r.solution.y);
  auto rec = compute_errors(p, x, y.first(6), y.subspan(6), &z);
  const auto& rep = r.solution.report;
  double diff = std::max({std::abs(rec.pinf - rep.pinf), std::abs(rec.gap - rep.gap),
                          std::abs(*rec.dinf - *rep.dinf), std::abs(*rec.compl_ - *rep.compl_)});
  bool ok = worst_norm <= 1e-15 && worst_rhs <= 1e-15 && worst_joint <= 1e-15 && worst_fix <= 1e-15 && diff <= 1e-14 &&
            r.solution.status == Status::tol;
  return {ok, fmt("matrix norms %.1e off 1; single-kind rhs sub-vector norms %.1e off 1; mixed rhs shares one divisor "
                  "(joint norm %.1e off 1, e.g. |a|=%.3f |b|=%.3f); scale twice %.1e; unscaled report vs "
                  "recomputation %.1e",
                  worst_norm, worst_rhs, worst_joint, mixed_a, mixed_b, worst_fix, diff)};
}

// 9: extended precision
Outcome extended() {
  auto p = gen_random_sdp({10}, 10, 1.0, 1);
  SolverOptions o;
  o.max_iters = 100000;
  auto t0 = std::chrono::steady_clock::now();
  auto r = solve_two_stage(p, 1e-20, o);
  double t = seconds_since(t0);
  const auto& rep = r.solution.report;
  double err = static_cast<double>(max_of(max_of(rep.pinf, rep.gap), max_of(*rep.dinf, *rep.compl_)));
  bool ok = r.solution.status == Status::tol && err < 1e-18 && t < 600.0;
  return {ok, fmt("rand_10_10_1.0 two-stage: status %s, max unscaled error %.2e, stage iterations %lld + %lld, %.2fs",
                  std::string(status_name(r.solution.status)).c_str(), err, r.first.iterations, r.second.iterations, t)};
}

// 10: rank rule
Outcome rank_rule() {
  int mismatches = 0, checked = 0;
  for (int n = 1; n <= 120; ++n) {
    for (int m = 0; m <= 600; ++m) {
      int k = 1;
      while (k * k < 2 * m) ++k;  // ceil(sqrt(2m)) by search
      ++checked;
      mismatches += factor_rank(n, m) != std::min(n, k);
    }
  }
  bool named = factor_rank(100, 50) == 10 && factor_rank(3, 100) == 3;
  auto p = gen_random_sdp({3, 8, 40}, 12, 0.5, 2);
  auto s = init_state(p, SolverOptions{});
  bool multi = s.factors[0].rows() == 3 && s.factors[1].rows() == 5 && s.factors[2].rows() == 5;
  return {mismatches == 0 && named && multi,
          fmt("%d (n, m) pairs, %d mismatches; (100,50)->%d, (3,100)->%d; blocks {3,8,40} with m=12 -> k = {%d,%d,%d}",
              checked, mismatches, factor_rank(100, 50), factor_rank(3, 100), s.factors[0].rows(),
              s.factors[1].rows(), s.factors[2].rows())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"max-cut K3 optima", maxcut_k3},
      {"theta numbers", theta},
      {"random SDPs to 1e-10", random_sdps},
      {"stagnation fixture", stagnation},
      {"gradient vs finite differences", gradient_fd},
      {"incremental operator values", incremental},
      {"penalty and dual rules", penalty_rules},
      {"scaling", scaling},
      {"double-double refinement", extended},
      {"rank rule", rank_rule},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s\n", index, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
