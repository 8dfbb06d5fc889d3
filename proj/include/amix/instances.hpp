#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "amix/problem.hpp"

namespace amix {

struct Edge {
  int i;  // 0-based, i < j
  int j;
  double weight = 1.0;
};

/// Simple undirected graph.
struct Graph {
  int n = 0;
  std::vector<Edge> edges;

  /// Throws std::invalid_argument on loops, duplicates, bad indices or
  /// nonfinite weights.
  void check() const;

  static Graph complete(int n);
  static Graph cycle(int n);
  static Graph empty(int n);
};

/// Edge list: header `n m`, then m lines `i j [w]` with 1-based vertices;
/// a missing weight means 1. Blank lines and lines starting with `#` are
/// skipped. Endpoints are stored with i < j.
Graph parse_graph(std::istream& in);
Graph load_graph(const std::filesystem::path& path);

/// Erdos-Renyi G(n, p) with unit weights.
Graph random_graph(int n, double p, std::uint64_t seed);

/// Equality-only random SDP. The first constraint is the identity on
/// every block; the cost and every other constraint fill
/// round(density * n(n+1)/2) random upper-triangle positions per block with
/// values uniform on [-1, 1]. a_j = trace(A_j), so X = I is strictly
/// feasible.
SdpProblem<double> gen_random_sdp(const std::vector<int>& block_sizes, int m, double density,
                                  std::uint64_t seed);

/// Max-cut relaxation: maximize <L/4, X> s.t. diag(X) = e.
///
/// Emitted as a minimization of <-L0/4, X>, where L0 is the Laplacian
/// with zeroed diagonal; the diagonal's constant contribution sum(deg)/4
/// is the orientation offset. Triangle inequalities add four constraints
/// per triple i < j < k in lexicographic order.
SdpProblem<double> maxcut_relaxation(const Graph& g, bool with_triangles);

/// Theta relaxation: maximize <J, X> s.t. X_ij = 0 on edges, trace X = 1.
/// The strengthened form adds X_ij >= 0 on every non-edge i < j.
SdpProblem<double> theta_relaxation(const Graph& g, bool strengthened);

}  // namespace amix
