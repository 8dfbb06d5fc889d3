#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "amix/auglag.hpp"
#include "amix/lbfgs.hpp"
#include "amix/linops.hpp"
#include "amix/problem.hpp"

namespace amix {

enum class Status { tol, iter, time, numerical_error };

std::string_view status_name(Status s);
Status parse_status(std::string_view name);

struct SolverOptions {
  double tol = 1e-12;
  std::optional<double> mu_start;  // default sqrt(max block size)
  double time_limit = std::numeric_limits<double>::infinity();
  long long max_iters = std::numeric_limits<long long>::max();
  int iters_z = 50;
  bool scaling = true;
  bool shuffling = false;
  bool double_sweep = false;
  double p = 1.0;
  double delta = 0.01;
  double epsilon = 0.01;
  int max_evals = 1000;
  double tau = 1.03;
  double rat_min = 0.8;
  double rat_max = 1.2;
  int memory = 10;
  // Inner steps per column update before the inner stop rule applies.
  int min_inner_steps = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on out-of-range values.
  void check() const;
};

/// KKT error measures; dinf and compl need Z and may be absent.
template <class T>
struct ErrorReport {
  T pinf = T(0.0);
  T gap = T(0.0);
  std::optional<T> dinf;
  std::optional<T> compl_;
  T compl_star = T(0.0);

  T max_error() const {
    T m = max_of(pinf, gap);
    if (dinf) m = max_of(m, *dinf);
    if (compl_) m = max_of(m, *compl_);
    return m;
  }
  T proxy_error() const { return max_of(max_of(pinf, gap), compl_star); }
};

/// Resumable solver state in scaled space.
template <class T>
struct WarmStart {
  Factors<T> factors;
  std::vector<T> y_eq;
  std::vector<T> y_ineq;
  T mu = T(1.0);
};

template <class T>
struct Solution {
  Factors<T> factors;  // X_i = V_i^T V_i
  std::vector<T> y;    // (y_a; y_b)
  std::vector<DenseMatrix<T>> z;
  Status status = Status::iter;
  ErrorReport<T> report;         // on the problem the solution is stated for
  ErrorReport<T> scaled_report;  // the report that drove termination
  long long iterations = 0;
  double seconds = 0.0;
  T primal_objective = T(0.0);
  T dual_objective = T(0.0);

  std::vector<DenseMatrix<T>> x() const {
    std::vector<DenseMatrix<T>> out;
    for (const auto& v : factors) out.push_back(gram(v));
    return out;
  }
};

/// Per-iteration progress record.
struct Progress {
  long long iteration;
  double mu;
  double ratio;
  double pinf;
  double gap;
  double compl_star;
  double seconds;
};
using ProgressSink = std::function<void(const Progress&)>;

// ---------------------------------------------------------------------------
// Error measures

/// Error measures of (X, y, Z) on `p`. X is given by dense blocks; Z is
/// optional (dinf and compl are reported only when it is present).
template <class T>
ErrorReport<T> compute_errors(const SdpProblem<T>& p, const std::vector<DenseMatrix<T>>& x,
                              std::span<const T> y_eq, std::span<const T> y_ineq,
                              const std::type_identity_t<std::vector<DenseMatrix<T>>>* z) {
  const int m_a = p.num_equalities();
  const auto values = apply_operator_dense(p, x);
  const T cx = cost_value_dense(p, x);

  T viol(0.0), rhs_max_a(0.0), rhs_max_b(0.0);
  std::vector<T> dual_terms;
  for (int j = 0; j < p.num_constraints(); ++j) {
    T r = p.rhs[j] - values[j];
    if (j < m_a) {
      viol = max_of(viol, abs_value(r));
      rhs_max_a = max_of(rhs_max_a, abs_value(p.rhs[j]));
      dual_terms.push_back(p.rhs[j] * y_eq[j]);
    } else {
      viol = max_of(viol, positive_part(r));
      rhs_max_b = max_of(rhs_max_b, abs_value(p.rhs[j]));
      dual_terms.push_back(p.rhs[j] * y_ineq[j - m_a]);
    }
  }
  const T by = pairwise_sum<T>(dual_terms);
  const T denom = T(1.0) + abs_value(cx) + abs_value(by);

  ErrorReport<T> rep;
  rep.pinf = viol / (T(1.0) + max_of(rhs_max_a, rhs_max_b));
  rep.gap = abs_value(cx - by) / denom;

  std::vector<T> y(y_eq.begin(), y_eq.end());
  y.insert(y.end(), y_ineq.begin(), y_ineq.end());
  std::vector<T> yv;
  for (int j = 0; j < p.num_constraints(); ++j) yv.push_back(y[j] * values[j]);
  rep.compl_star = abs_value(cx - pairwise_sum<T>(yv)) / denom;

  if (z) {
    auto slack = dual_slack_matrix(p, std::span<const T>(y));
    T res(0.0), xz(0.0);
    for (int b = 0; b < p.num_blocks(); ++b) {
      const auto& s = slack[b];
      const auto& zb = (*z)[b];
      for (int c = 0; c < s.cols(); ++c) {
        for (int r = 0; r < s.rows(); ++r) {
          T d = s(r, c) - zb(r, c);
          res += d * d;
          xz += x[b](r, c) * zb(r, c);
        }
      }
    }
    rep.dinf = square_root(res) / (T(1.0) + p.cost_frobenius_norm());
    rep.compl_ = abs_value(xz) / denom;
  }
  return rep;
}

/// Z = [C - A^T y_a - B^T y_b]_+ per block.
template <class T>
std::vector<DenseMatrix<T>> compute_z(const SdpProblem<T>& p, std::span<const T> y) {
  auto slack = dual_slack_matrix(p, y);
  std::vector<DenseMatrix<T>> z;
  for (const auto& s : slack) z.push_back(project_psd(s));
  return z;
}

/// Full report with a fresh PSD projection for Z.
template <class T>
ErrorReport<T> compute_full_errors(const SdpProblem<T>& p, const Factors<T>& v,
                                   std::span<const T> y,
                                   std::type_identity_t<std::vector<DenseMatrix<T>>>* z_out) {
  const int m_a = p.num_equalities();
  std::vector<DenseMatrix<T>> x;
  for (const auto& f : v) x.push_back(gram(f));
  auto z = compute_z(p, y);
  auto rep = compute_errors(p, x, y.first(static_cast<std::size_t>(m_a)),
                            y.subspan(static_cast<std::size_t>(m_a)), &z);
  if (z_out) *z_out = std::move(z);
  return rep;
}

// ---------------------------------------------------------------------------
// Outer-loop building blocks

/// Random columns on the unit sphere (normalized Gaussian samples), zero
/// multipliers, mu = mu_start.
template <class T>
IterateState<T> init_state(const SdpProblem<T>& p, const SolverOptions& opt) {
  IterateState<T> s;
  const int m = p.num_constraints();
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int n : p.block_sizes) {
    const int k = factor_rank(n, m);
    DenseMatrix<T> v(k, n);
    for (int c = 0; c < n; ++c) {
      std::vector<double> col(static_cast<std::size_t>(k));
      double norm = 0.0;
      do {
        norm = 0.0;
        for (auto& x : col) {
          x = normal(rng);
          norm += x * x;
        }
      } while (norm == 0.0);
      T tnorm = square_root(convert_scalar<T>(norm));
      for (int r = 0; r < k; ++r) v(r, c) = convert_scalar<T>(col[r]) / tnorm;
    }
    s.factors.push_back(std::move(v));
  }
  s.y_eq.assign(static_cast<std::size_t>(p.num_equalities()), T(0.0));
  s.y_ineq.assign(static_cast<std::size_t>(p.num_inequalities()), T(0.0));
  s.mu = opt.mu_start ? T(*opt.mu_start) : square_root(T(double(p.max_block_size())));
  s.cache = compute_cache(p, s.factors);
  s.prev_values = s.cache.values;
  return s;
}

/// Column visiting order (0-based) for one block in one outer iteration.
/// Shuffling draws a fresh permutation from `rng`; double sweep appends
/// the reverse of the forward order.
inline std::vector<int> sweep_order(int n, const SolverOptions& opt, std::mt19937_64& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (opt.shuffling) std::shuffle(order.begin(), order.end(), rng);
  if (opt.double_sweep) order.insert(order.end(), order.rbegin(), order.rend());
  return order;
}

/// y_a += p mu (a - A(X));  y_b = [y_b + p mu (b - B(X))]_+.
template <class T>
void update_duals(IterateState<T>& s, const SdpProblem<T>& p, T step) {
  const int m_a = p.num_equalities();
  for (int j = 0; j < p.num_constraints(); ++j) {
    T r = p.rhs[j] - s.cache.values[j];
    if (j < m_a) {
      s.y_eq[j] += step * s.mu * r;
    } else {
      auto& y = s.y_ineq[j - m_a];
      y = positive_part(y + step * s.mu * r);
    }
  }
}

/// ||(a - A(X_new); P(b - B(X_new)))|| / (mu ||(A(X_new - X_old); P(B(X_new - X_old)))||)
/// over the active inequalities {j : b_j - B_j(X_new) >= 0 or y_j > 0};
/// +inf when the denominator vanishes.
template <class T>
T penalty_ratio(const IterateState<T>& s, const SdpProblem<T>& p) {
  const int m_a = p.num_equalities();
  std::vector<T> num, den;
  for (int j = 0; j < p.num_constraints(); ++j) {
    T r = p.rhs[j] - s.cache.values[j];
    if (j >= m_a && !(r >= T(0.0) || s.y_ineq[j - m_a] > T(0.0))) continue;
    T change = s.cache.values[j] - s.prev_values[j];
    num.push_back(r * r);
    den.push_back(change * change);
  }
  T numerator = square_root(pairwise_sum<T>(num));
  T denominator = s.mu * square_root(pairwise_sum<T>(den));
  if (!(denominator > T(0.0))) return infinity<T>();
  return numerator / denominator;
}

/// mu *= tau above rat_max, mu /= tau below rat_min.
template <class T>
void update_penalty(IterateState<T>& s, T ratio, const SolverOptions& opt) {
  if (ratio > T(opt.rat_max)) {
    s.mu *= T(opt.tau);
  } else if (ratio < T(opt.rat_min)) {
    s.mu /= T(opt.tau);
  }
}

/// Cheap report from cached operator values (no Z).
template <class T>
ErrorReport<T> cached_errors(const IterateState<T>& s, const SdpProblem<T>& p) {
  const int m_a = p.num_equalities();
  T viol(0.0), rhs_max(0.0);
  std::vector<T> by, yv;
  for (int j = 0; j < p.num_constraints(); ++j) {
    T r = p.rhs[j] - s.cache.values[j];
    T y = j < m_a ? s.y_eq[j] : s.y_ineq[j - m_a];
    viol = max_of(viol, j < m_a ? abs_value(r) : positive_part(r));
    rhs_max = max_of(rhs_max, abs_value(p.rhs[j]));
    by.push_back(p.rhs[j] * y);
    yv.push_back(y * s.cache.values[j]);
  }
  const T cx = s.cache.cost;
  const T dual = pairwise_sum<T>(by);
  const T denom = T(1.0) + abs_value(cx) + abs_value(dual);
  ErrorReport<T> rep;
  rep.pinf = viol / (T(1.0) + rhs_max);
  rep.gap = abs_value(cx - dual) / denom;
  rep.compl_star = abs_value(cx - pairwise_sum<T>(yv)) / denom;
  return rep;
}

template <class T>
std::vector<T> stacked_duals(const IterateState<T>& s) {
  std::vector<T> y = s.y_eq;
  y.insert(y.end(), s.y_ineq.begin(), s.y_ineq.end());
  return y;
}

/// Maps a solution of scale(original) back to the original data and
/// recomputes every error measure there.
///
/// X = s X~ (factor times sqrt(s)), y_j = |C| y~_j / |A_j|, and Z is a
/// fresh projection of C - A^T y on the original data.
template <class T>
Solution<T> unscale_solution(const Solution<T>& sol, const ScalingRecord<T>& rec,
                             const SdpProblem<T>& original) {
  const int m = original.num_constraints();
  if (static_cast<int>(rec.constraint_norms.size()) != m || static_cast<int>(sol.y.size()) != m ||
      static_cast<int>(sol.factors.size()) != original.num_blocks()) {
    throw std::invalid_argument("scaling record does not match the problem");
  }
  Solution<T> out = sol;
  const T root = square_root(rec.rhs_norm);
  for (auto& f : out.factors) {
    for (auto& x : f.data()) x *= root;
  }
  for (int j = 0; j < m; ++j) out.y[j] = rec.cost_norm * sol.y[j] / rec.constraint_norms[j];
  out.report = compute_full_errors(original, out.factors, std::span<const T>(out.y), &out.z);
  out.primal_objective = cost_value(original, out.factors);
  std::vector<T> by;
  for (int j = 0; j < m; ++j) by.push_back(original.rhs[j] * out.y[j]);
  out.dual_objective = pairwise_sum<T>(by);
  return out;
}

template <class T>
void check_warm_start(const WarmStart<T>& w, const SdpProblem<T>& p) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("warm start does not match the problem: " + what);
  };
  if (static_cast<int>(w.factors.size()) != p.num_blocks()) fail("block count");
  for (int b = 0; b < p.num_blocks(); ++b) {
    if (w.factors[b].cols() != p.block_sizes[b] || w.factors[b].rows() < 1) {
      fail("factor shape of block " + std::to_string(b + 1));
    }
  }
  if (static_cast<int>(w.y_eq.size()) != p.num_equalities()) fail("equality multipliers");
  if (static_cast<int>(w.y_ineq.size()) != p.num_inequalities()) fail("inequality multipliers");
  for (const auto& y : w.y_ineq) {
    if (y < T(0.0)) fail("negative inequality multiplier");
  }
  if (!(w.mu > T(0.0))) fail("penalty must be positive");
}

template <class T>
struct SolveResult {
  Solution<T> solution;
  WarmStart<T> warm_start;
  LagrangianStats stats;
};

/// Augmented Lagrangian / block coordinate descent solve of `problem`.
///
/// Each outer iteration minimizes the augmented Lagrangian column by
/// column with L-BFGS, then updates multipliers and the penalty. The
/// proxy max(pinf, gap, compl*) is evaluated every iteration; Z and the
/// full four-measure test run only every `iters_z` iterations once the
/// proxy is below tol.
template <class T>
SolveResult<T> solve(const SdpProblem<T>& problem, const SolverOptions& opt,
                     const std::type_identity_t<WarmStart<T>>* warm = nullptr,
                     const ProgressSink& sink = {}) {
  using Clock = std::chrono::steady_clock;
  opt.check();
  validate(problem);
  const auto started = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  ScaledProblem<T> scaled = opt.scaling
                                ? scale(problem)
                                : ScaledProblem<T>{problem, ScalingRecord<T>::identity(
                                                                problem.num_constraints())};
  const SdpProblem<T>& p = scaled.problem;
  LagrangianModel<T> model(p);

  IterateState<T> state;
  if (warm) {
    check_warm_start(*warm, p);
    state.factors = warm->factors;
    state.y_eq = warm->y_eq;
    state.y_ineq = warm->y_ineq;
    state.mu = warm->mu;
    state.cache = compute_cache(p, state.factors);
    state.prev_values = state.cache.values;
  } else {
    state = init_state(p, opt);
  }

  InnerConfig<T> inner{opt.memory, T(opt.epsilon), T(opt.delta), opt.max_evals, opt.min_inner_steps};
  std::mt19937_64 order_rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  const T tol(opt.tol);
  const T step(opt.p);

  Solution<T> sol;
  Status status = Status::iter;
  bool done = false;
  long long iter = 0;

  auto full_check = [&]() {
    auto y = stacked_duals(state);
    sol.scaled_report = compute_full_errors(p, state.factors, std::span<const T>(y), nullptr);
    return sol.scaled_report.max_error() < tol;
  };

  if (warm && cached_errors(state, p).proxy_error() < tol && full_check()) {
    status = Status::tol;
    done = true;
  }

  std::vector<int> order;
  while (!done) {
    if (iter >= opt.max_iters) {
      status = Status::iter;
      break;
    }
    ++iter;
    for (int b = 0; b < p.num_blocks() && !done; ++b) {
      order = sweep_order(p.block_sizes[b], opt, order_rng);
      for (int i : order) {
        if (elapsed() > opt.time_limit) {
          status = Status::time;
          done = true;
          break;
        }
        auto obj = model.column(state, b, i);
        auto res = minimize_column<T>(
            [&obj](std::span<const T> v, std::span<T> g) { return obj.evaluate(v, g); },
            obj.start(), inner);
        if (res.nonfinite) {
          status = Status::numerical_error;
          done = true;
          break;
        }
        model.commit(state, b, i, std::span<const T>(res.v));
      }
    }
    if (done) break;

    model.refresh(state);
    update_duals(state, p, step);
    T ratio = penalty_ratio(state, p);
    update_penalty(state, ratio, opt);
    state.prev_values = state.cache.values;

    auto rep = cached_errors(state, p);
    sol.scaled_report = rep;
    if (!is_finite(rep.pinf) || !is_finite(rep.gap) || !is_finite(state.mu)) {
      status = Status::numerical_error;
      break;
    }
    if (sink) {
      sink({iter, to_double(state.mu), to_double(ratio), to_double(rep.pinf), to_double(rep.gap),
            to_double(rep.compl_star), elapsed()});
    }
    if (iter % opt.iters_z == 0 && rep.proxy_error() < tol && full_check()) {
      status = Status::tol;
      break;
    }
  }

  sol.factors = state.factors;
  sol.y = stacked_duals(state);
  sol.status = status;
  sol.iterations = iter;

  SolveResult<T> result;
  result.warm_start = {state.factors, state.y_eq, state.y_ineq, state.mu};
  result.solution = unscale_solution(sol, scaled.record, problem);
  result.solution.seconds = elapsed();
  result.stats = model.stats();
  return result;
}

}  // namespace amix
