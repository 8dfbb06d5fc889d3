#include "amix/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace amix {

void Graph::check() const {
  if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      throw std::invalid_argument("edge (" + std::to_string(e.i + 1) + "," +
                                  std::to_string(e.j + 1) + ") out of range");
    }
    if (e.i == e.j) throw std::invalid_argument("loop at vertex " + std::to_string(e.i + 1));
    if (e.i > e.j) throw std::invalid_argument("edge endpoints must satisfy i < j");
    if (!std::isfinite(e.weight)) throw std::invalid_argument("nonfinite edge weight");
    if (!seen.insert({e.i, e.j}).second) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.i + 1) + "," +
                                  std::to_string(e.j + 1) + ")");
    }
  }
}

Graph Graph::complete(int n) {
  Graph g{n, {}};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j, 1.0});
  }
  return g;
}

Graph Graph::cycle(int n) {
  Graph g{n, {}};
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1.0});
  if (n > 2) g.edges.push_back({0, n - 1, 1.0});
  return g;
}

Graph Graph::empty(int n) { return Graph{n, {}}; }

Graph parse_graph(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      auto pos = out.find_first_not_of(" \t\r");
      if (pos == std::string::npos || out[pos] == '#') continue;
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("graph line " + std::to_string(lineno) + ": " + what);
  };
  if (!next(line)) throw std::invalid_argument("graph: missing header");
  Graph g;
  long long m = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> g.n >> m) || g.n < 1 || m < 0) fail("expected header 'n m'");
  }
  for (long long e = 0; e < m; ++e) {
    if (!next(line)) throw std::invalid_argument("graph: expected " + std::to_string(m) + " edges");
    std::istringstream ss(line);
    int i = 0, j = 0;
    double w = 1.0;
    if (!(ss >> i >> j)) fail("expected 'i j [w]'");
    if (!(ss >> w)) w = 1.0;
    if (i < 1 || j < 1 || i > g.n || j > g.n) fail("vertex out of range");
    if (i == j) fail("loop");
    if (i > j) std::swap(i, j);
    g.edges.push_back({i - 1, j - 1, w});
  }
  g.check();
  return g;
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file " + path.string());
  return parse_graph(in);
}

Graph random_graph(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Graph g{n, {}};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unit(rng) < p) g.edges.push_back({i, j, 1.0});
    }
  }
  return g;
}

namespace {

SymMatrix<double> random_sparse(int n, double density, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> slots;
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r <= c; ++r) slots.emplace_back(r, c);
  }
  auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(slots.size())));
  count = std::min(count, slots.size());
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (std::size_t s = 0; s < count; ++s) {
    std::uniform_int_distribution<std::size_t> pick(s, slots.size() - 1);
    std::swap(slots[s], slots[pick(rng)]);
  }
  std::sort(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(count),
            [](auto a, auto b) { return std::pair(a.second, a.first) < std::pair(b.second, b.first); });
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  SymMatrix<double> m(n);
  for (std::size_t s = 0; s < count; ++s) {
    double v = 0.0;
    while (v == 0.0) v = value(rng);
    m.add(slots[s].first, slots[s].second, v);
  }
  return m;
}

double trace(const SymMatrix<double>& m) {
  double t = 0.0;
  for (const auto& e : m.entries()) {
    if (e.row == e.col) t += e.value;
  }
  return t;
}

}  // namespace

SdpProblem<double> gen_random_sdp(const std::vector<int>& block_sizes, int m, double density,
                                  std::uint64_t seed) {
  if (block_sizes.empty()) throw std::invalid_argument("need at least one block");
  for (int n : block_sizes) {
    if (n < 1) throw std::invalid_argument("block sizes must be positive");
  }
  if (m < 1) throw std::invalid_argument("need at least one constraint");
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("density must be in (0, 1]");
  std::mt19937_64 rng(seed);
  auto p = make_problem<double>(block_sizes);
  const int q = p.num_blocks();
  for (int b = 0; b < q; ++b) p.costs[b] = random_sparse(block_sizes[b], density, rng);

  Constraint<double> identity;
  double total = 0.0;
  for (int b = 0; b < q; ++b) {
    SymMatrix<double> eye(block_sizes[b]);
    for (int i = 0; i < block_sizes[b]; ++i) eye.add(i, i, 1.0);
    identity.terms.push_back({b, std::move(eye)});
    total += block_sizes[b];
  }
  p.constraints.push_back(std::move(identity));
  p.rhs.push_back(total);

  for (int j = 1; j < m; ++j) {
    Constraint<double> con;
    double a = 0.0;
    for (int b = 0; b < q; ++b) {
      auto mat = random_sparse(block_sizes[b], density, rng);
      if (mat.empty()) continue;
      a += trace(mat);
      con.terms.push_back({b, std::move(mat)});
    }
    if (con.terms.empty()) {
      // Density too low to draw anything; keep the constraint nonvacuous.
      SymMatrix<double> mat(block_sizes[0]);
      mat.add(0, 0, 1.0);
      a = 1.0;
      con.terms.push_back({0, std::move(mat)});
    }
    p.constraints.push_back(std::move(con));
    p.rhs.push_back(a);
  }
  p.ineq_start = m + 1;
  return p;
}

SdpProblem<double> maxcut_relaxation(const Graph& g, bool with_triangles) {
  g.check();
  const int n = g.n;
  if (with_triangles && n < 3) throw std::invalid_argument("triangle inequalities need n >= 3");
  auto p = make_problem<double>({n});
  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : g.edges) {
    // -L/4 off the diagonal is +w/4.
    if (e.weight != 0.0) p.costs[0].add(e.i, e.j, e.weight / 4.0);
    degree[e.i] += e.weight;
    degree[e.j] += e.weight;
  }
  double offset = 0.0;
  for (double d : degree) offset += d / 4.0;
  p.orientation = {-1.0, offset};

  for (int i = 0; i < n; ++i) {
    SymMatrix<double> e(n);
    e.add(i, i, 1.0);
    p.constraints.push_back({{{0, std::move(e)}}});
    p.rhs.push_back(1.0);
  }
  p.ineq_start = n + 1;
  if (with_triangles) {
    static constexpr int kSigns[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          for (const auto& s : kSigns) {
            SymMatrix<double> b(n);
            b.add(i, j, 0.5 * s[0]);
            b.add(i, k, 0.5 * s[1]);
            b.add(j, k, 0.5 * s[2]);
            p.constraints.push_back({{{0, std::move(b)}}});
            p.rhs.push_back(-1.0);
          }
        }
      }
    }
  }
  return p;
}

SdpProblem<double> theta_relaxation(const Graph& g, bool strengthened) {
  g.check();
  const int n = g.n;
  auto p = make_problem<double>({n});
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r <= c; ++r) p.costs[0].add(r, c, -1.0);
  }
  p.orientation = {-1.0, 0.0};

  std::set<std::pair<int, int>> edges;
  for (const auto& e : g.edges) {
    edges.insert({e.i, e.j});
    SymMatrix<double> a(n);
    a.add(e.i, e.j, 0.5);
    p.constraints.push_back({{{0, std::move(a)}}});
    p.rhs.push_back(0.0);
  }
  SymMatrix<double> eye(n);
  for (int i = 0; i < n; ++i) eye.add(i, i, 1.0);
  p.constraints.push_back({{{0, std::move(eye)}}});
  p.rhs.push_back(1.0);
  p.ineq_start = p.num_constraints() + 1;

  if (strengthened) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (edges.contains({i, j})) continue;
        SymMatrix<double> b(n);
        b.add(i, j, 0.5);
        p.constraints.push_back({{{0, std::move(b)}}});
        p.rhs.push_back(0.0);
      }
    }
  }
  return p;
}

}  // namespace amix
