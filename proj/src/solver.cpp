#include "amix/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace amix {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::tol:
      return "tol";
    case Status::iter:
      return "iter";
    case Status::time:
      return "time";
    case Status::numerical_error:
      return "numerical_error";
  }
  return "unknown";
}

Status parse_status(std::string_view name) {
  for (Status s : {Status::tol, Status::iter, Status::time, Status::numerical_error}) {
    if (status_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown status '" + std::string(name) + "'");
}

void SolverOptions::check() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid option: " + what); };
  if (!(tol > 0.0)) fail("tol must be positive");
  if (mu_start && !(*mu_start > 0.0 && std::isfinite(*mu_start))) fail("mu-start must be positive");
  if (!(time_limit > 0.0)) fail("time-limit must be positive");
  if (max_iters < 0) fail("max-iters must be nonnegative");
  if (iters_z < 1) fail("iters-z must be at least 1");
  if (!(p > 0.0)) fail("p must be positive");
  if (!(delta > 0.0)) fail("delta must be positive");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (max_evals < 1) fail("max-evals must be at least 1");
  if (!(tau > 1.0)) fail("tau must exceed 1");
  if (!(rat_min > 0.0 && rat_min < rat_max)) fail("need 0 < rat-min < rat-max");
  if (memory < 1) fail("memory must be at least 1");
  if (min_inner_steps < 0) fail("min-inner-steps must be nonnegative");
}

}  // namespace amix
