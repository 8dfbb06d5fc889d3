// amix command-line front end: solve, generate, check.
//
// Exit codes: 0 solved to tolerance (or check passed), 2 iteration/time
// limit (or check threshold exceeded), 3 numerical breakdown, 1 bad input.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "amix/instances.hpp"
#include "amix/io.hpp"
#include "amix/precision.hpp"
#include "amix/solver.hpp"

namespace {

using namespace amix;

// AMIX_LOG: 0/quiet, 1/info (default), 2/debug (per-iteration progress).
int log_level() {
  const char* env = std::getenv("AMIX_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "0" || v == "quiet") return 0;
  if (v == "2" || v == "debug") return 2;
  return 1;
}

void log(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "amix: " << msg << '\n';
}

ProgressSink progress_sink() {
  if (log_level() < 2) return {};
  return [](const Progress& p) {
    std::fprintf(stderr, "iter %6lld  mu %.3e  ratio %.3e  pinf %.3e  gap %.3e  compl* %.3e  %.2fs\n",
                 p.iteration, p.mu, p.ratio, p.pinf, p.gap, p.compl_star, p.seconds);
  };
}

int exit_code(Status s) {
  switch (s) {
    case Status::tol:
      return 0;
    case Status::iter:
    case Status::time:
      return 2;
    case Status::numerical_error:
      return 3;
  }
  return 3;
}

template <class T>
void print_report(const ErrorReport<T>& r) {
  auto show = [](const char* name, const std::optional<T>& v) {
    std::cout << name << ' ' << (v ? ScalarTraits<T>::format(*v) : std::string("-")) << '\n';
  };
  show("pinf", r.pinf);
  show("gap", r.gap);
  show("dinf", r.dinf);
  show("compl", r.compl_);
  show("compl_star", r.compl_star);
  std::cout << "max_error " << ScalarTraits<double>::format(to_double(r.max_error())) << '\n';
}

template <class T>
void print_solution(const Solution<T>& s, const SdpProblem<double>& p) {
  const auto& o = p.orientation;
  const double primal = to_double(s.primal_objective);
  std::cout << "status " << status_name(s.status) << '\n';
  std::cout << "iterations " << s.iterations << '\n';
  std::cout << "seconds " << s.seconds << '\n';
  std::cout << "objective " << ScalarTraits<T>::format(s.primal_objective) << '\n';
  std::cout << "dual_objective " << ScalarTraits<T>::format(s.dual_objective) << '\n';
  std::cout << "reported_objective " << ScalarTraits<double>::format(o.sign * primal + o.offset)
            << '\n';
  if (o.offset != 0.0) {
    std::cout << "reported_objective_unshifted " << ScalarTraits<double>::format(o.sign * primal)
              << '\n';
  }
  print_report(s.report);
}

template <class T>
void save(const std::string& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  writer(out);
  if (!out) throw std::invalid_argument("write failed for " + path);
}

template <class T>
WarmStart<T> load_warm_start(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open warm start " + path);
  auto kind = peek_kind(in);
  if (kind == ScalarTraits<T>::kind) return read_warm_start<T>(in);
  if constexpr (std::is_same_v<T, DoubleDouble>) {
    return promote<DoubleDouble>(read_warm_start<double>(in));
  } else {
    throw std::invalid_argument("warm start " + path + " is double-double; use --precision dd");
  }
}

struct SolveArgs {
  std::string problem;
  std::string output;
  std::string precision = "double";
  std::string warm_start;
  std::string save_warm_start;
  std::optional<double> mu_start;
  std::optional<double> time_limit;
  std::optional<long long> max_iters;
  SolverOptions opt;
};

template <class T>
int finish(const SolveResult<T>& r, const SolveArgs& a, const SdpProblem<double>& p) {
  save<T>(a.output, [&](std::ostream& out) { write_solution(r.solution, out); });
  if (!a.save_warm_start.empty()) {
    save<T>(a.save_warm_start, [&](std::ostream& out) { write_warm_start(r.warm_start, out); });
  }
  print_solution(r.solution, p);
  log(1, "solution written to " + a.output);
  return exit_code(r.solution.status);
}

int cmd_solve(SolveArgs& a) {
  auto problem = load_problem(a.problem);
  auto& opt = a.opt;
  opt.mu_start = a.mu_start;
  if (a.time_limit) opt.time_limit = *a.time_limit;
  if (a.max_iters) opt.max_iters = *a.max_iters;
  opt.check();
  if (a.output.empty()) a.output = a.problem + ".sol";
  const auto kind = parse_kind(a.precision);
  log(1, "solving " + a.problem + " (" + std::to_string(problem.num_blocks()) + " blocks, " +
             std::to_string(problem.num_equalities()) + " equalities, " +
             std::to_string(problem.num_inequalities()) + " inequalities) at " +
             std::string(kind_name(kind)));

  if (kind == ScalarKind::binary64) {
    std::optional<WarmStart<double>> warm;
    if (!a.warm_start.empty()) warm = load_warm_start<double>(a.warm_start);
    auto r = solve(problem, opt, warm ? &*warm : nullptr, progress_sink());
    return finish(r, a, problem);
  }
  auto problem_dd = problem.cast<DoubleDouble>();
  if (!a.warm_start.empty()) {
    auto warm = load_warm_start<DoubleDouble>(a.warm_start);
    auto r = solve(problem_dd, opt, &warm, progress_sink());
    return finish(r, a, problem);
  }
  auto two = solve_two_stage(problem, opt.tol, opt, progress_sink());
  log(1, "stage 1: " + std::string(status_name(two.first.status)) + " after " +
             std::to_string(two.first.iterations) + " iterations; stage 2: " +
             (two.second.ran ? std::string(status_name(two.second.status)) + " after " +
                                   std::to_string(two.second.iterations) + " iterations"
                             : std::string("skipped")));
  SolveResult<DoubleDouble> r{std::move(two.solution), std::move(two.warm_start), {}};
  return finish(r, a, problem);
}

struct GenerateArgs {
  std::string family;
  std::string output;
  std::vector<int> blocks;
  int m = 0;
  double density = 1.0;
  std::uint64_t seed = 0;
  std::string graph;
  bool triangles = false;
  bool strengthened = false;
};

int cmd_generate(const GenerateArgs& a) {
  SdpProblem<double> p;
  if (a.family == "rand") {
    if (a.blocks.empty()) throw std::invalid_argument("rand needs --blocks");
    p = gen_random_sdp(a.blocks, a.m, a.density, a.seed);
  } else {
    if (a.graph.empty()) throw std::invalid_argument(a.family + " needs --graph");
    auto g = load_graph(a.graph);
    p = a.family == "maxcut" ? maxcut_relaxation(g, a.triangles) : theta_relaxation(g, a.strengthened);
  }
  save_problem(p, a.output);
  std::cout << "blocks";
  for (int n : p.block_sizes) std::cout << ' ' << n;
  std::cout << " m_a " << p.num_equalities() << " m_b " << p.num_inequalities() << '\n';
  return 0;
}

struct CheckArgs {
  std::string problem;
  std::string solution;
  double threshold = 1e-6;
};

template <class T>
int check_with(const SdpProblem<double>& original, std::istream& in, double threshold) {
  auto sol = read_solution<T>(in);
  auto p = original.template cast<T>();
  detail::check_factor_shapes(p, sol.factors);
  if (static_cast<int>(sol.y.size()) != p.num_constraints()) {
    throw std::invalid_argument("shape mismatch: solution has " + std::to_string(sol.y.size()) +
                                " duals for " + std::to_string(p.num_constraints()) + " constraints");
  }
  for (std::size_t b = 0; b < sol.z.size(); ++b) {
    if (sol.z[b].cols() != p.block_sizes[b]) throw std::invalid_argument("shape mismatch: Z block");
  }
  auto z = sol.z.size() == static_cast<std::size_t>(p.num_blocks())
               ? sol.z
               : compute_z(p, std::span<const T>(sol.y));
  auto x = sol.x();
  const auto m_a = static_cast<std::size_t>(p.num_equalities());
  std::span<const T> y(sol.y);
  auto rep = compute_errors(p, x, y.first(m_a), y.subspan(m_a), &z);
  print_report(rep);
  return to_double(rep.max_error()) < threshold ? 0 : 2;
}

int cmd_check(const CheckArgs& a) {
  auto problem = load_problem(a.problem);
  std::ifstream in(a.solution);
  if (!in) throw std::invalid_argument("cannot open solution " + a.solution);
  if (peek_kind(in) == ScalarKind::binary64) return check_with<double>(problem, in, a.threshold);
  return check_with<DoubleDouble>(problem, in, a.threshold);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amix: low-rank augmented Lagrangian SDP solver"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file (native or .dat-s)");
  solve_cmd->add_option("problem", sa.problem, "Problem file")->required();
  solve_cmd->add_option("-o,--output", sa.output, "Solution file (default <problem>.sol)");
  solve_cmd->add_option("--precision", sa.precision, "double or dd")
      ->check(CLI::IsMember({"double", "dd"}));
  solve_cmd->add_option("--warm-start", sa.warm_start, "Resume from a warm-start file");
  solve_cmd->add_option("--save-warm-start", sa.save_warm_start, "Write the final state here");
  auto& o = sa.opt;
  solve_cmd->add_option("--tol", o.tol, "Termination tolerance")->capture_default_str();
  solve_cmd->add_option("--mu-start", sa.mu_start, "Initial penalty (default sqrt(max block size))");
  solve_cmd->add_option("--time-limit", sa.time_limit, "Seconds");
  solve_cmd->add_option("--max-iters", sa.max_iters, "Outer iteration limit");
  solve_cmd->add_option("--iters-z", o.iters_z, "Full error check cadence")->capture_default_str();
  solve_cmd->add_flag("--scaling,!--no-scaling", o.scaling, "Normalize data (default on)");
  solve_cmd->add_flag("--shuffling", o.shuffling, "Random column order per iteration");
  solve_cmd->add_flag("--double-sweep", o.double_sweep, "Forward then reverse column sweep");
  solve_cmd->add_option("--p", o.p, "Dual step factor")->capture_default_str();
  solve_cmd->add_option("--delta", o.delta, "Relative inner tolerance")->capture_default_str();
  solve_cmd->add_option("--epsilon", o.epsilon, "Absolute inner tolerance")->capture_default_str();
  solve_cmd->add_option("--max-evals", o.max_evals, "Inner evaluation budget")->capture_default_str();
  solve_cmd->add_option("--tau", o.tau, "Penalty update factor")->capture_default_str();
  solve_cmd->add_option("--rat-min", o.rat_min, "Lower ratio threshold")->capture_default_str();
  solve_cmd->add_option("--rat-max", o.rat_max, "Upper ratio threshold")->capture_default_str();
  solve_cmd->add_option("--memory", o.memory, "L-BFGS history length")->capture_default_str();
  solve_cmd->add_option("--min-inner-steps", o.min_inner_steps, "Inner steps before the inner stop rule")
      ->capture_default_str();
  solve_cmd->add_option("--seed", o.seed, "Initialization seed")->capture_default_str();

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "Write a test instance in native format");
  gen_cmd->add_option("family", ga.family, "rand, maxcut or theta")
      ->required()
      ->check(CLI::IsMember({"rand", "maxcut", "theta"}));
  gen_cmd->add_option("-o,--output", ga.output, "Problem file")->required();
  gen_cmd->add_option("--blocks", ga.blocks, "Block sizes, e.g. 30 or 20,20")->delimiter(',');
  gen_cmd->add_option("--m", ga.m, "Number of constraints (rand)");
  gen_cmd->add_option("--density", ga.density, "Fill fraction (rand)")->capture_default_str();
  gen_cmd->add_option("--seed", ga.seed, "Generator seed (rand)")->capture_default_str();
  gen_cmd->add_option("--graph", ga.graph, "Edge-list file (maxcut, theta)");
  gen_cmd->add_flag("--triangles", ga.triangles, "Add triangle inequalities (maxcut)");
  gen_cmd->add_flag("--strengthened", ga.strengthened, "Add nonnegativity on non-edges (theta)");

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "Recompute error measures of a solution");
  check_cmd->add_option("problem", ca.problem, "Problem file")->required();
  check_cmd->add_option("solution", ca.solution, "Solution file")->required();
  check_cmd->add_option("--threshold", ca.threshold, "Pass if max error is below")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve_cmd) return cmd_solve(sa);
    if (*gen_cmd) return cmd_generate(ga);
    return cmd_check(ca);
  } catch (const std::exception& e) {
    std::cerr << "amix: error: " << e.what() << '\n';
    return 1;
  }
}
