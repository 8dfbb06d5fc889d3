#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

#include "amix/solver.hpp"

namespace amix {

/// Digits-of-precision ordering of the scalar kinds.
inline int precision_rank(ScalarKind kind) { return kind == ScalarKind::binary64 ? 0 : 1; }

/// Converts a warm start to a wider kind. Widening from binary64 is exact.
/// Throws std::invalid_argument for a narrowing request.
template <class To, class From>
WarmStart<To> promote(const WarmStart<From>& w) {
  if (precision_rank(ScalarTraits<To>::kind) < precision_rank(ScalarTraits<From>::kind)) {
    throw std::invalid_argument(std::string("narrowing conversion from ") +
                                std::string(kind_name(ScalarTraits<From>::kind)) + " to " +
                                std::string(kind_name(ScalarTraits<To>::kind)));
  }
  WarmStart<To> out;
  for (const auto& f : w.factors) out.factors.push_back(f.template cast<To>());
  for (const auto& y : w.y_eq) out.y_eq.push_back(convert_scalar<To>(y));
  for (const auto& y : w.y_ineq) out.y_ineq.push_back(convert_scalar<To>(y));
  out.mu = convert_scalar<To>(w.mu);
  return out;
}

struct StageSummary {
  Status status = Status::iter;
  long long iterations = 0;
  double seconds = 0.0;
  bool ran = false;
};

struct TwoStageResult {
  Solution<DoubleDouble> solution;  // stated on the extended-precision data
  WarmStart<DoubleDouble> warm_start;
  StageSummary first;
  StageSummary second;
};

/// Tolerance of the binary64 stage.
inline constexpr double kFirstStageTol = 1e-12;

/// Solves at binary64 to 1e-12, then promotes the final state and resumes
/// at double-double until `target_tol`. A first stage that ends without
/// reaching its tolerance is returned as is (no second stage).
///
/// `opt.time_limit` and `opt.max_iters` bound both stages combined.
inline TwoStageResult solve_two_stage(const SdpProblem<double>& problem, double target_tol,
                                      const SolverOptions& opt, const ProgressSink& sink = {}) {
  if (!(target_tol > 0.0)) throw std::invalid_argument("invalid option: target tol must be positive");
  SolverOptions first_opt = opt;
  first_opt.tol = std::max(kFirstStageTol, target_tol);
  auto first = solve(problem, first_opt, nullptr, sink);

  TwoStageResult out;
  out.first = {first.solution.status, first.solution.iterations, first.solution.seconds, true};
  const auto problem_dd = problem.cast<DoubleDouble>();
  auto warm = promote<DoubleDouble>(first.warm_start);

  if (first.solution.status != Status::tol) {
    // Restate the stage-one result on the extended data.
    SolverOptions frozen = opt;
    frozen.max_iters = 0;
    auto held = solve(problem_dd, frozen, &warm);
    out.solution = std::move(held.solution);
    out.solution.status = first.solution.status;
    out.solution.iterations = first.solution.iterations;
    out.solution.seconds = first.solution.seconds;
    out.warm_start = std::move(held.warm_start);
    return out;
  }

  SolverOptions second_opt = opt;
  second_opt.tol = target_tol;
  second_opt.time_limit = opt.time_limit - first.solution.seconds;
  if (!(second_opt.time_limit > 0.0)) second_opt.time_limit = std::numeric_limits<double>::min();
  if (opt.max_iters != std::numeric_limits<long long>::max()) {
    second_opt.max_iters = std::max(0LL, opt.max_iters - first.solution.iterations);
  }
  auto second = solve(problem_dd, second_opt, &warm, sink);
  out.second = {second.solution.status, second.solution.iterations, second.solution.seconds, true};
  out.solution = std::move(second.solution);
  out.solution.iterations += first.solution.iterations;
  out.solution.seconds += first.solution.seconds;
  out.warm_start = std::move(second.warm_start);
  return out;
}

}  // namespace amix
