#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amix/problem.hpp"
#include "amix/scalar.hpp"

namespace amix {

/// Column-major dense matrix. Factors V are stored k x n so that each
/// column v_i is contiguous.
template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, T(0.0)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int r, int c) { return data_[std::size_t(c) * rows_ + r]; }
  const T& operator()(int r, int c) const { return data_[std::size_t(c) * rows_ + r]; }
  std::span<T> col(int c) { return {data_.data() + std::size_t(c) * rows_, std::size_t(rows_)}; }
  std::span<const T> col(int c) const {
    return {data_.data() + std::size_t(c) * rows_, std::size_t(rows_)};
  }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  T frobenius_norm() const {
    T s(0.0);
    for (const auto& x : data_) s += x * x;
    return square_root(s);
  }

  template <class U>
  DenseMatrix<U> cast() const {
    DenseMatrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = convert_scalar<U>(data_[i]);
    return out;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <class T>
using Factors = std::vector<DenseMatrix<T>>;  // one k_i x n_i factor per block

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Pairwise (cascade) summation.
template <class T>
T pairwise_sum(std::span<const T> x) {
  if (x.size() <= 8) {
    T s(0.0);
    for (const auto& v : x) s += v;
    return s;
  }
  std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

/// Gram matrix V^T V of one factor.
template <class T>
DenseMatrix<T> gram(const DenseMatrix<T>& v) {
  const int n = v.cols();
  DenseMatrix<T> x(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r <= c; ++r) {
      T s = dot<T>(v.col(r), v.col(c));
      x(r, c) = s;
      x(c, r) = s;
    }
  }
  return x;
}

/// <A, V^T V> from sparse entries without forming V^T V.
template <class T>
T inner_with_factor(const SymMatrix<T>& a, const DenseMatrix<T>& v) {
  T sum(0.0);
  for (const auto& e : a.entries()) {
    T p = e.value * dot<T>(v.col(e.row), v.col(e.col));
    sum += e.row == e.col ? p : T(2.0) * p;
  }
  return sum;
}

namespace detail {

template <class T>
void check_factor_shapes(const SdpProblem<T>& p, const Factors<T>& v) {
  if (static_cast<int>(v.size()) != p.num_blocks()) {
    throw std::invalid_argument("shape mismatch: " + std::to_string(v.size()) +
                                " factors for " + std::to_string(p.num_blocks()) + " blocks");
  }
  for (int b = 0; b < p.num_blocks(); ++b) {
    if (v[b].cols() != p.block_sizes[b]) {
      throw std::invalid_argument("shape mismatch: factor " + std::to_string(b + 1) + " has " +
                                  std::to_string(v[b].cols()) + " columns, block size " +
                                  std::to_string(p.block_sizes[b]));
    }
  }
}

}  // namespace detail

/// (A(V^T V); B(V^T V)) summed over blocks, length m.
template <class T>
std::vector<T> apply_operator(const SdpProblem<T>& p, const Factors<T>& v) {
  detail::check_factor_shapes(p, v);
  std::vector<T> out(p.constraints.size(), T(0.0));
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    for (const auto& t : p.constraints[j].terms) out[j] += inner_with_factor(t.matrix, v[t.block]);
  }
  return out;
}

/// <C, V^T V> summed over blocks.
template <class T>
T cost_value(const SdpProblem<T>& p, const Factors<T>& v) {
  detail::check_factor_shapes(p, v);
  T s(0.0);
  for (int b = 0; b < p.num_blocks(); ++b) s += inner_with_factor(p.costs[b], v[b]);
  return s;
}

/// Operator values on dense symmetric blocks X_i.
template <class T>
std::vector<T> apply_operator_dense(const SdpProblem<T>& p, const std::vector<DenseMatrix<T>>& x) {
  std::vector<T> out(p.constraints.size(), T(0.0));
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    for (const auto& t : p.constraints[j].terms) out[j] += t.matrix.inner(x[t.block]);
  }
  return out;
}

template <class T>
T cost_value_dense(const SdpProblem<T>& p, const std::vector<DenseMatrix<T>>& x) {
  T s(0.0);
  for (int b = 0; b < p.num_blocks(); ++b) s += p.costs[b].inner(x[b]);
  return s;
}

/// sum_j y_j A_j per block (dense, symmetric).
template <class T>
std::vector<DenseMatrix<T>> apply_adjoint(const SdpProblem<T>& p, std::span<const T> y) {
  if (static_cast<int>(y.size()) != p.num_constraints()) {
    throw std::invalid_argument("length mismatch: y has " + std::to_string(y.size()) +
                                " entries for " + std::to_string(p.num_constraints()) +
                                " constraints");
  }
  std::vector<DenseMatrix<T>> out;
  for (int n : p.block_sizes) out.emplace_back(n, n);
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] == T(0.0)) continue;
    for (const auto& t : p.constraints[j].terms) {
      auto& m = out[t.block];
      for (const auto& e : t.matrix.entries()) {
        T v = y[j] * e.value;
        m(e.row, e.col) += v;
        if (e.row != e.col) m(e.col, e.row) += v;
      }
    }
  }
  return out;
}

/// C - sum_j y_j A_j per block.
template <class T>
std::vector<DenseMatrix<T>> dual_slack_matrix(const SdpProblem<T>& p, std::span<const T> y) {
  auto out = apply_adjoint(p, y);
  for (auto& m : out) {
    for (auto& x : m.data()) x = -x;
  }
  for (int b = 0; b < p.num_blocks(); ++b) {
    for (const auto& e : p.costs[b].entries()) {
      out[b](e.row, e.col) += e.value;
      if (e.row != e.col) out[b](e.col, e.row) += e.value;
    }
  }
  return out;
}

/// Column i of every constraint restricted to one block:
/// Ahat_i = ((A_1)_(i) | ... | (A_m)_(i)) in sparse form, plus the cost
/// column C_(i).
///
/// Off-diagonal neighbours r != i are mapped to compact slots in `rows`.
/// Each off-diagonal coefficient appears once per column slice; the factor
/// 2 of the symmetric inner product is applied by the kernels.
template <class T>
struct ColumnSlice {
  std::vector<int> rows;  // neighbour rows r != i, slot -> row
  T cost_diag = T(0.0);
  std::vector<int> cost_slot;
  std::vector<T> cost_value;
  std::vector<int> touched;  // constraint indices with a nonzero in column i
  std::vector<T> diag;       // (A_j)_(ii) per touched constraint
  std::vector<int> ptr;      // touched.size() + 1 offsets into off_*
  std::vector<int> off_slot;
  std::vector<T> off_value;
};

template <class T>
class ColumnSlices {
 public:
  ColumnSlices() = default;

  explicit ColumnSlices(const SdpProblem<T>& p) : slices_(p.block_sizes.size()) {
    struct Raw {
      std::map<int, T> diag;                              // constraint -> value
      std::map<int, std::vector<std::pair<int, T>>> off;  // constraint -> (row, value)
      T cost_diag = T(0.0);
      std::vector<std::pair<int, T>> cost_off;
    };
    for (int b = 0; b < p.num_blocks(); ++b) {
      const int n = p.block_sizes[b];
      std::vector<Raw> raw(static_cast<std::size_t>(n));
      for (const auto& e : p.costs[b].entries()) {
        if (e.row == e.col) {
          raw[e.row].cost_diag += e.value;
        } else {
          raw[e.row].cost_off.push_back({e.col, e.value});
          raw[e.col].cost_off.push_back({e.row, e.value});
        }
      }
      for (int j = 0; j < p.num_constraints(); ++j) {
        for (const auto& t : p.constraints[j].terms) {
          if (t.block != b) continue;
          for (const auto& e : t.matrix.entries()) {
            if (e.row == e.col) {
              raw[e.row].diag[j] += e.value;
            } else {
              raw[e.row].off[j].push_back({e.col, e.value});
              raw[e.col].off[j].push_back({e.row, e.value});
            }
          }
        }
      }
      auto& out = slices_[b];
      out.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        auto& r = raw[i];
        auto& s = out[i];
        std::map<int, int> slot_of;
        auto slot = [&](int row) {
          auto [it, inserted] = slot_of.try_emplace(row, static_cast<int>(s.rows.size()));
          if (inserted) s.rows.push_back(row);
          return it->second;
        };
        s.cost_diag = r.cost_diag;
        for (auto [row, val] : r.cost_off) {
          s.cost_slot.push_back(slot(row));
          s.cost_value.push_back(val);
        }
        std::set<int> touched;
        for (const auto& [j, v] : r.diag) touched.insert(j);
        for (const auto& [j, v] : r.off) touched.insert(j);
        s.ptr.push_back(0);
        for (int j : touched) {
          s.touched.push_back(j);
          auto d = r.diag.find(j);
          s.diag.push_back(d == r.diag.end() ? T(0.0) : d->second);
          auto o = r.off.find(j);
          if (o != r.off.end()) {
            for (auto [row, val] : o->second) {
              s.off_slot.push_back(slot(row));
              s.off_value.push_back(val);
            }
          }
          s.ptr.push_back(static_cast<int>(s.off_slot.size()));
        }
      }
    }
  }

  const ColumnSlice<T>& at(int block, int col) const { return slices_[block][col]; }
  int num_blocks() const { return static_cast<int>(slices_.size()); }
  int block_size(int block) const { return static_cast<int>(slices_[block].size()); }

  /// Rebuilds the constraint matrices of block `block` from the slices.
  /// Each off-diagonal pair is taken from the slice of its larger index.
  std::map<int, SymMatrix<T>> reassemble(int block) const {
    std::map<int, SymMatrix<T>> out;
    const int n = block_size(block);
    for (int i = 0; i < n; ++i) {
      const auto& s = slices_[block][i];
      for (std::size_t t = 0; t < s.touched.size(); ++t) {
        auto [it, _] = out.try_emplace(s.touched[t], n);
        if (s.diag[t] != T(0.0)) it->second.add(i, i, s.diag[t]);
        for (int o = s.ptr[t]; o < s.ptr[t + 1]; ++o) {
          int row = s.rows[s.off_slot[o]];
          if (row < i) it->second.add(row, i, s.off_value[o]);
        }
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<ColumnSlice<T>>> slices_;
};

/// Operator values A(V^T V), B(V^T V) and <C, V^T V> for the current V.
template <class T>
struct OperatorCache {
  std::vector<T> values;
  T cost = T(0.0);
};

template <class T>
OperatorCache<T> compute_cache(const SdpProblem<T>& p, const Factors<T>& v) {
  return {apply_operator(p, v), cost_value(p, v)};
}

/// Change of every touched constraint value (and of the cost value) when
/// column i of `v` moves from v_start to v_trial:
///   delta_j = (|v_trial|^2 - |v_start|^2) (A_j)_ii + 2 Ahat_i^T Vbar(0)^T (v_trial - v_start).
/// Columns of `v` other than i supply Vbar(0). `neighbour` is scratch of size
/// slice.rows.size(). Cost O(k * |rows| + nnz(Ahat_i)).
template <class T>
T column_deltas(const ColumnSlice<T>& slice, const DenseMatrix<T>& v,
                std::span<const T> v_start, std::span<const T> v_trial, std::span<T> neighbour,
                std::span<T> deltas) {
  const int k = v.rows();
  T sq_change(0.0);
  for (int r = 0; r < k; ++r) sq_change += (v_trial[r] - v_start[r]) * (v_trial[r] + v_start[r]);
  for (std::size_t s = 0; s < slice.rows.size(); ++s) {
    auto vr = v.col(slice.rows[s]);
    T acc(0.0);
    for (int r = 0; r < k; ++r) acc += vr[r] * (v_trial[r] - v_start[r]);
    neighbour[s] = acc;
  }
  for (std::size_t t = 0; t < slice.touched.size(); ++t) {
    T acc(0.0);
    for (int o = slice.ptr[t]; o < slice.ptr[t + 1]; ++o) {
      acc += slice.off_value[o] * neighbour[slice.off_slot[o]];
    }
    deltas[t] = sq_change * slice.diag[t] + T(2.0) * acc;
  }
  T cost_acc(0.0);
  for (std::size_t o = 0; o < slice.cost_slot.size(); ++o) {
    cost_acc += slice.cost_value[o] * neighbour[slice.cost_slot[o]];
  }
  return sq_change * slice.cost_diag + T(2.0) * cost_acc;
}

/// Full operator vector after replacing column i of block `block` by
/// v_trial, computed incrementally from the cache.
template <class T>
std::vector<T> incremental_operator_values(const OperatorCache<T>& cache,
                                           const ColumnSlices<T>& slices, const Factors<T>& v,
                                           int block, int i, std::span<const T> v_start,
                                           std::span<const T> v_trial) {
  const auto& slice = slices.at(block, i);
  std::vector<T> neighbour(slice.rows.size());
  std::vector<T> deltas(slice.touched.size());
  column_deltas<T>(slice, v[block], v_start, v_trial, neighbour, deltas);
  std::vector<T> out = cache.values;
  for (std::size_t t = 0; t < slice.touched.size(); ++t) out[slice.touched[t]] += deltas[t];
  return out;
}

/// Raised when the eigensolver exceeds its sweep cap.
class EigenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
struct SymmetricEigen {
  std::vector<T> values;
  DenseMatrix<T> vectors;  // column l is the eigenvector of values[l]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Works for any scalar kind with +,-,*,/ and sqrt, which is what the
/// extended-precision path needs.
template <class T>
SymmetricEigen<T> symmetric_eigen(DenseMatrix<T> a, int max_sweeps = 100) {
  const int n = a.rows();
  DenseMatrix<T> u(n, n);
  for (int i = 0; i < n; ++i) u(i, i) = T(1.0);
  const T eps = std::numeric_limits<T>::epsilon();
  T total(0.0);
  for (const auto& x : a.data()) total += x * x;
  const T target = T(double(n)) * eps * eps * total;

  bool converged = n <= 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    T off(0.0);
    for (int q = 1; q < n; ++q) {
      for (int p = 0; p < q; ++p) off += a(p, q) * a(p, q);
    }
    if (!(off > target)) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        T apq = a(p, q);
        if (apq == T(0.0)) continue;
        T theta = (a(q, q) - a(p, p)) / (T(2.0) * apq);
        T t = T(1.0) / (abs_value(theta) + square_root(theta * theta + T(1.0)));
        if (theta < T(0.0)) t = -t;
        T c = T(1.0) / square_root(t * t + T(1.0));
        T s = t * c;
        for (int r = 0; r < n; ++r) {
          T arp = a(r, p);
          T arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          T apr = a(p, r);
          T aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = T(0.0);
        a(q, p) = T(0.0);
        for (int r = 0; r < n; ++r) {
          T urp = u(r, p);
          T urq = u(r, q);
          u(r, p) = c * urp - s * urq;
          u(r, q) = s * urp + c * urq;
        }
      }
    }
  }
  if (!converged) {
    T off(0.0);
    for (int q = 1; q < n; ++q) {
      for (int p = 0; p < q; ++p) off += a(p, q) * a(p, q);
    }
    if (off > target) throw EigenError("Jacobi eigensolver did not converge");
  }
  SymmetricEigen<T> out{std::vector<T>(static_cast<std::size_t>(n)), std::move(u)};
  for (int i = 0; i < n; ++i) out.values[i] = a(i, i);
  return out;
}

/// Metric projection onto the PSD cone: negative eigenvalues zeroed.
template <class T>
DenseMatrix<T> project_psd(const DenseMatrix<T>& m) {
  const int n = m.rows();
  auto eig = symmetric_eigen(m);
  DenseMatrix<T> z(n, n);
  for (int l = 0; l < n; ++l) {
    T lambda = eig.values[l];
    if (!(lambda > T(0.0))) continue;
    auto ul = eig.vectors.col(l);
    for (int c = 0; c < n; ++c) {
      T f = lambda * ul[c];
      for (int r = 0; r <= c; ++r) z(r, c) += f * ul[r];
    }
  }
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < c; ++r) z(c, r) = z(r, c);
  }
  return z;
}

}  // namespace amix
