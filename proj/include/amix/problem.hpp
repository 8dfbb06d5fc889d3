#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amix/scalar.hpp"

namespace amix {

/// Raised when problem data violates a structural invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when scaling cannot be applied (vacuous constraints).
class ScalingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
struct SparseEntry {
  int row;  // 0-based, row <= col
  int col;
  T value;
};

/// Symmetric matrix stored as its upper triangle.
///
/// An off-diagonal entry (r, c) stands for both A_rc and A_cr, so it
/// contributes twice to trace inner products.
template <class T>
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int order) : order_(order) {}

  int order() const { return order_; }
  bool empty() const { return entries_.empty(); }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const SparseEntry<T>> entries() const { return entries_; }
  std::vector<SparseEntry<T>>& mutable_entries() { return entries_; }

  /// Appends an entry; (row, col) is mirrored into the upper triangle.
  void add(int row, int col, T value) {
    if (row > col) std::swap(row, col);
    entries_.push_back({row, col, value});
  }

  T frobenius_norm_squared() const {
    T sum(0.0);
    for (const auto& e : entries_) {
      T sq = e.value * e.value;
      sum += e.row == e.col ? sq : T(2.0) * sq;
    }
    return sum;
  }

  /// Trace inner product with a dense symmetric matrix given as accessor.
  template <class Dense>
  T inner(const Dense& x) const {
    T sum(0.0);
    for (const auto& e : entries_) {
      T v = e.value * x(e.row, e.col);
      sum += e.row == e.col ? v : T(2.0) * v;
    }
    return sum;
  }

  void scale(T factor) {
    for (auto& e : entries_) e.value *= factor;
  }

  template <class U>
  SymMatrix<U> cast() const {
    SymMatrix<U> out(order_);
    for (const auto& e : entries_) out.add(e.row, e.col, convert_scalar<U>(e.value));
    return out;
  }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    if (a.order_ != b.order_ || a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (x.row != y.row || x.col != y.col || !(x.value == y.value)) return false;
    }
    return true;
  }

 private:
  int order_ = 0;
  std::vector<SparseEntry<T>> entries_;
};

/// Part of a constraint living on one block.
template <class T>
struct BlockTerm {
  int block;  // 0-based
  SymMatrix<T> matrix;

  friend bool operator==(const BlockTerm&, const BlockTerm&) = default;
};

template <class T>
struct Constraint {
  std::vector<BlockTerm<T>> terms;

  friend bool operator==(const Constraint&, const Constraint&) = default;

  T frobenius_norm_squared() const {
    T sum(0.0);
    for (const auto& t : terms) sum += t.matrix.frobenius_norm_squared();
    return sum;
  }
};

/// Maps the minimization objective back to the orientation a generator
/// intends: reported = sign * <C, X> + offset.
struct ObjectiveOrientation {
  double sign = 1.0;
  double offset = 0.0;

  friend bool operator==(const ObjectiveOrientation&, const ObjectiveOrientation&) = default;
};

/// minimize sum_i <C_i, X_i>  s.t.  A(X) = a,  B(X) >= b,  X_i PSD.
///
/// Constraints are ordered equalities first; `ineq_start` is the 1-based
/// index of the first inequality (m + 1 when there are none).
template <class T>
struct SdpProblem {
  std::vector<int> block_sizes;
  std::vector<SymMatrix<T>> costs;  // one per block
  std::vector<Constraint<T>> constraints;
  std::vector<T> rhs;
  int ineq_start = 1;
  ObjectiveOrientation orientation;

  int num_blocks() const { return static_cast<int>(block_sizes.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
  int num_equalities() const { return ineq_start - 1; }
  int num_inequalities() const { return num_constraints() - num_equalities(); }
  bool is_equality(int j) const { return j < num_equalities(); }
  int max_block_size() const {
    return block_sizes.empty() ? 0 : *std::max_element(block_sizes.begin(), block_sizes.end());
  }

  T cost_frobenius_norm() const {
    T sum(0.0);
    for (const auto& c : costs) sum += c.frobenius_norm_squared();
    return square_root(sum);
  }

  template <class U>
  SdpProblem<U> cast() const {
    SdpProblem<U> out;
    out.block_sizes = block_sizes;
    out.ineq_start = ineq_start;
    out.orientation = orientation;
    for (const auto& c : costs) out.costs.push_back(c.template cast<U>());
    for (const auto& con : constraints) {
      Constraint<U> c2;
      for (const auto& t : con.terms) c2.terms.push_back({t.block, t.matrix.template cast<U>()});
      out.constraints.push_back(std::move(c2));
    }
    for (const auto& b : rhs) out.rhs.push_back(convert_scalar<U>(b));
    return out;
  }

  friend bool operator==(const SdpProblem&, const SdpProblem&) = default;
};

/// Empty problem with the given block sizes and zero costs.
template <class T>
SdpProblem<T> make_problem(std::vector<int> block_sizes) {
  SdpProblem<T> p;
  p.block_sizes = std::move(block_sizes);
  for (int n : p.block_sizes) p.costs.emplace_back(n);
  return p;
}

namespace detail {

template <class T>
void validate_matrix(const SymMatrix<T>& m, int block_size, const std::string& where) {
  if (m.order() != block_size) {
    throw ValidationError("dimension mismatch: " + where + " has order " +
                          std::to_string(m.order()) + " but block size is " +
                          std::to_string(block_size));
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& e : m.entries()) {
    if (e.row < 0 || e.col < 0 || e.row >= block_size || e.col >= block_size || e.row > e.col) {
      throw ValidationError("dimension mismatch: " + where + " entry (" +
                            std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) +
                            ") outside block of size " + std::to_string(block_size));
    }
    if (!is_finite(e.value)) {
      throw ValidationError("nonfinite value in " + where + " at (" + std::to_string(e.row + 1) +
                            "," + std::to_string(e.col + 1) + ")");
    }
    if (!seen.insert({e.row, e.col}).second) {
      throw ValidationError("duplicate entry in " + where + " at (" + std::to_string(e.row + 1) +
                            "," + std::to_string(e.col + 1) + ")");
    }
  }
}

}  // namespace detail

/// Throws ValidationError naming the offending constraint/block.
template <class T>
void validate(const SdpProblem<T>& p) {
  if (p.block_sizes.empty()) throw ValidationError("problem has no blocks");
  for (std::size_t i = 0; i < p.block_sizes.size(); ++i) {
    if (p.block_sizes[i] < 1) {
      throw ValidationError("block " + std::to_string(i + 1) + " has nonpositive size");
    }
  }
  if (p.costs.size() != p.block_sizes.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(p.costs.size()) +
                          " cost matrices for " + std::to_string(p.block_sizes.size()) +
                          " blocks");
  }
  const int m = p.num_constraints();
  if (static_cast<int>(p.rhs.size()) != m) {
    throw ValidationError("dimension mismatch: rhs has length " + std::to_string(p.rhs.size()) +
                          " but there are " + std::to_string(m) + " constraints");
  }
  if (p.ineq_start < 1 || p.ineq_start > m + 1) {
    throw ValidationError("ineq_start out of range: " + std::to_string(p.ineq_start) +
                          " with m = " + std::to_string(m));
  }
  for (int b = 0; b < p.num_blocks(); ++b) {
    detail::validate_matrix(p.costs[b], p.block_sizes[b], "cost of block " + std::to_string(b + 1));
  }
  for (int j = 0; j < m; ++j) {
    const auto& con = p.constraints[j];
    if (con.terms.empty()) {
      throw ValidationError("constraint " + std::to_string(j + 1) + " touches no block");
    }
    std::set<int> blocks;
    for (const auto& t : con.terms) {
      std::string where =
          "constraint " + std::to_string(j + 1) + " block " + std::to_string(t.block + 1);
      if (t.block < 0 || t.block >= p.num_blocks()) {
        throw ValidationError("dimension mismatch: " + where + " does not exist");
      }
      if (!blocks.insert(t.block).second) throw ValidationError("duplicate entry: " + where);
      detail::validate_matrix(t.matrix, p.block_sizes[t.block], where);
    }
    if (!is_finite(p.rhs[j])) {
      throw ValidationError("nonfinite value in rhs of constraint " + std::to_string(j + 1));
    }
  }
}

/// Norms removed by `scale`, sufficient to map solutions back.
///
/// The cost norm is the joint Frobenius norm over all blocks; constraint
/// norms likewise span every block a constraint touches. `rhs_norm` is the
/// divisor actually applied to both rhs sub-vectors (see `scale`).
template <class T>
struct ScalingRecord {
  T cost_norm = T(1.0);
  std::vector<T> constraint_norms;
  T rhs_eq_norm = T(1.0);
  T rhs_ineq_norm = T(1.0);
  T rhs_norm = T(1.0);

  static ScalingRecord identity(int m) {
    ScalingRecord r;
    r.constraint_norms.assign(static_cast<std::size_t>(m), T(1.0));
    return r;
  }
};

template <class T>
struct ScaledProblem {
  SdpProblem<T> problem;
  ScalingRecord<T> record;
};

/// Normalizes every constraint matrix and the cost to unit Frobenius norm,
/// divides each rhs entry by its constraint norm, then normalizes the rhs.
///
/// The rhs divisor s becomes the scale of X (X = s * X_scaled), so one
/// divisor must serve equalities and inequalities alike: s is the l2 norm
/// of the stacked vector (a_bar; b_bar). When only one of the two
/// sub-vectors is nonzero this is exactly its own unit normalization. A
/// zero rhs leaves s = 1, and a zero cost is left untouched.
template <class T>
ScaledProblem<T> scale(const SdpProblem<T>& p) {
  const int m = p.num_constraints();
  ScaledProblem<T> out{p, ScalingRecord<T>::identity(m)};
  auto& q = out.problem;
  auto& rec = out.record;

  T cost_norm = p.cost_frobenius_norm();
  if (cost_norm > T(0.0)) {
    rec.cost_norm = cost_norm;
    T inv = T(1.0) / cost_norm;
    for (auto& c : q.costs) c.scale(inv);
  }

  T eq_sq(0.0), ineq_sq(0.0);
  for (int j = 0; j < m; ++j) {
    T norm = square_root(p.constraints[j].frobenius_norm_squared());
    if (!(norm > T(0.0))) {
      throw ScalingError("zero-norm constraint matrix (constraint " + std::to_string(j + 1) + ")");
    }
    rec.constraint_norms[j] = norm;
    T inv = T(1.0) / norm;
    for (auto& t : q.constraints[j].terms) t.matrix.scale(inv);
    q.rhs[j] = p.rhs[j] / norm;
    (p.is_equality(j) ? eq_sq : ineq_sq) += q.rhs[j] * q.rhs[j];
  }
  T eq_norm = square_root(eq_sq);
  T ineq_norm = square_root(ineq_sq);
  rec.rhs_eq_norm = eq_norm > T(0.0) ? eq_norm : T(1.0);
  rec.rhs_ineq_norm = ineq_norm > T(0.0) ? ineq_norm : T(1.0);
  T joint = square_root(eq_sq + ineq_sq);
  if (joint > T(0.0)) {
    rec.rhs_norm = joint;
    for (auto& b : q.rhs) b /= joint;
  }
  return out;
}

}  // namespace amix
