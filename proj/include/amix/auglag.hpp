#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "amix/linops.hpp"
#include "amix/problem.hpp"

namespace amix {

/// k = min(n, ceil(sqrt(2 m))) for m = m_a + m_b constraints; at least 1.
inline int factor_rank(int n, int m) {
  // smallest k with k^2 >= 2m, in integers
  long long k = static_cast<long long>(std::sqrt(2.0 * m));
  while (k * k < 2LL * m) ++k;
  while (k > 0 && (k - 1) * (k - 1) >= 2LL * m) --k;
  if (k < 1) k = 1;
  return k < n ? static_cast<int>(k) : n;
}

/// Primal factors, multipliers and penalty of one solve.
template <class T>
struct IterateState {
  Factors<T> factors;
  std::vector<T> y_eq;
  std::vector<T> y_ineq;  // kept >= 0
  T mu = T(1.0);
  OperatorCache<T> cache;
  std::vector<T> prev_values;  // operator values at the previous outer iterate
};

/// Counters for code-path instrumentation.
struct LagrangianStats {
  std::size_t column_evaluations = 0;
  std::size_t inequality_terms = 0;
};

template <class T>
class LagrangianModel;

/// Restriction of the augmented Lagrangian to one column v_i.
///
/// `evaluate` returns L(Vbar(v)) - L(Vbar(v_start)) and the gradient
/// with respect to v_i. Only the constraints touching column i change,
/// so each call costs O(k * |rows| + nnz(Ahat_i)).
template <class T>
class ColumnObjective {
 public:
  ColumnObjective(const LagrangianModel<T>& model, const IterateState<T>& state, int block, int col)
      : model_(&model),
        state_(&state),
        slice_(&model.slices().at(block, col)),
        block_(block),
        col_(col),
        v_start_(state.factors[block].col(col).begin(), state.factors[block].col(col).end()),
        neighbour_(slice_->rows.size()),
        deltas_(slice_->touched.size()),
        terms_(slice_->touched.size()),
        weights_(slice_->rows.size()) {
    const auto& p = model.problem();
    residual_start_.resize(slice_->touched.size());
    for (std::size_t t = 0; t < slice_->touched.size(); ++t) {
      int j = slice_->touched[t];
      residual_start_[t] = p.rhs[j] - state.cache.values[j];
    }
  }

  int dimension() const { return static_cast<int>(v_start_.size()); }
  std::span<const T> start() const { return v_start_; }

  T evaluate(std::span<const T> v, std::span<T> grad) {
    const auto& p = model_->problem();
    const auto& s = *slice_;
    const auto& vb = state_->factors[block_];
    const int k = dimension();
    const T mu = state_->mu;
    const int m_a = p.num_equalities();
    auto& stats = model_->stats_;
    ++stats.column_evaluations;

    T cost_delta =
        column_deltas<T>(s, vb, std::span<const T>(v_start_), v, neighbour_, deltas_);

    // Per-constraint change of the Lagrangian terms and the multiplier
    // estimate y + mu * residual at the trial point.
    T diag_weight = s.cost_diag;
    for (std::size_t r = 0; r < s.rows.size(); ++r) weights_[r] = T(0.0);
    for (std::size_t o = 0; o < s.cost_slot.size(); ++o) weights_[s.cost_slot[o]] += s.cost_value[o];

    for (std::size_t t = 0; t < s.touched.size(); ++t) {
      const int j = s.touched[t];
      const T delta = deltas_[t];
      const T r_old = residual_start_[t];
      const T r_new = r_old - delta;
      T coef;
      if (j < m_a) {
        const T y = state_->y_eq[j];
        terms_[t] = -delta * (y + mu * T(0.5) * (r_new + r_old));
        coef = y + mu * r_new;
      } else {
        ++stats.inequality_terms;
        const T y = state_->y_ineq[j - m_a];
        const T t_old = y + mu * r_old;
        const T t_new = y + mu * r_new;
        if (t_new > T(0.0) && t_old > T(0.0)) {
          terms_[t] = -delta * T(0.5) * (t_new + t_old);
        } else if (t_new > T(0.0)) {
          terms_[t] = t_new * t_new / (T(2.0) * mu);
        } else if (t_old > T(0.0)) {
          terms_[t] = -(t_old * t_old) / (T(2.0) * mu);
        } else {
          terms_[t] = T(0.0);
        }
        coef = t_new > T(0.0) ? t_new : T(0.0);
      }
      if (coef == T(0.0)) continue;
      diag_weight -= coef * s.diag[t];
      for (int o = s.ptr[t]; o < s.ptr[t + 1]; ++o) weights_[s.off_slot[o]] -= coef * s.off_value[o];
    }

    // grad = 2 Vbar(v) G_(i), with G = C - sum_j coef_j A_j.
    for (int r = 0; r < k; ++r) grad[r] = T(2.0) * diag_weight * v[r];
    for (std::size_t sl = 0; sl < s.rows.size(); ++sl) {
      const T w = weights_[sl];
      if (w == T(0.0)) continue;
      auto vr = vb.col(s.rows[sl]);
      for (int r = 0; r < k; ++r) grad[r] += T(2.0) * w * vr[r];
    }
    return cost_delta + pairwise_sum<T>(terms_);
  }

 private:
  const LagrangianModel<T>* model_;
  const IterateState<T>* state_;
  const ColumnSlice<T>* slice_;
  int block_;
  int col_;
  std::vector<T> v_start_;
  std::vector<T> residual_start_;
  std::vector<T> neighbour_;
  std::vector<T> deltas_;
  std::vector<T> terms_;
  std::vector<T> weights_;
};

/// Augmented Lagrangian of a (scaled) problem:
///
///   L = <C,X> + sum_eq [y_j r_j + mu/2 r_j^2]
///       + sum_{j in I} [y_j r_j + mu/2 r_j^2] - sum_{j notin I} y_j^2 / (2 mu)
///
/// with r = rhs - operator(X) and I = { j : y_j + mu r_j > 0 } over the
/// inequalities.
template <class T>
class LagrangianModel {
 public:
  explicit LagrangianModel(const SdpProblem<T>& problem) : problem_(&problem), slices_(problem) {}

  const SdpProblem<T>& problem() const { return *problem_; }
  const ColumnSlices<T>& slices() const { return slices_; }
  const LagrangianStats& stats() const { return stats_; }

  /// Value from the cached operator values.
  T value(const IterateState<T>& s) const {
    const auto& p = *problem_;
    const int m_a = p.num_equalities();
    std::vector<T> terms(static_cast<std::size_t>(p.num_constraints()) + 1);
    terms[0] = s.cache.cost;
    for (int j = 0; j < p.num_constraints(); ++j) {
      const T r = p.rhs[j] - s.cache.values[j];
      if (j < m_a) {
        terms[j + 1] = s.y_eq[j] * r + s.mu * T(0.5) * r * r;
      } else {
        const T y = s.y_ineq[j - m_a];
        const T t = y + s.mu * r;
        terms[j + 1] = t > T(0.0) ? y * r + s.mu * T(0.5) * r * r : -(y * y) / (T(2.0) * s.mu);
      }
    }
    return pairwise_sum<T>(terms);
  }

  /// Multipliers y_j + mu r_j (restricted to I for inequalities) that
  /// weight A_j in the gradient.
  std::vector<T> gradient_weights(const IterateState<T>& s) const {
    const auto& p = *problem_;
    const int m_a = p.num_equalities();
    std::vector<T> w(static_cast<std::size_t>(p.num_constraints()));
    for (int j = 0; j < p.num_constraints(); ++j) {
      const T r = p.rhs[j] - s.cache.values[j];
      if (j < m_a) {
        w[j] = s.y_eq[j] + s.mu * r;
      } else {
        w[j] = positive_part(s.y_ineq[j - m_a] + s.mu * r);
      }
    }
    return w;
  }

  /// 2 V (C - sum_j w_j A_j) per block.
  Factors<T> gradient(const IterateState<T>& s) const {
    auto weights = gradient_weights(s);
    auto g_mat = dual_slack_matrix(*problem_, std::span<const T>(weights));
    Factors<T> out;
    for (int b = 0; b < problem_->num_blocks(); ++b) {
      const auto& v = s.factors[b];
      DenseMatrix<T> g(v.rows(), v.cols());
      for (int c = 0; c < v.cols(); ++c) {
        for (int r = 0; r < v.cols(); ++r) {
          const T w = g_mat[b](r, c);
          if (w == T(0.0)) continue;
          for (int q = 0; q < v.rows(); ++q) g(q, c) += T(2.0) * w * v(q, r);
        }
      }
      out.push_back(std::move(g));
    }
    return out;
  }

  ColumnObjective<T> column(const IterateState<T>& s, int block, int col) const {
    return ColumnObjective<T>(*this, s, block, col);
  }

  /// Replaces column `col` of block `block` and updates the cache
  /// incrementally.
  void commit(IterateState<T>& s, int block, int col, std::span<const T> v_new) const {
    const auto& slice = slices_.at(block, col);
    auto column = s.factors[block].col(col);
    std::vector<T> v_start(column.begin(), column.end());
    std::vector<T> neighbour(slice.rows.size());
    std::vector<T> deltas(slice.touched.size());
    T cost_delta =
        column_deltas<T>(slice, s.factors[block], std::span<const T>(v_start), v_new, neighbour, deltas);
    for (std::size_t t = 0; t < slice.touched.size(); ++t) s.cache.values[slice.touched[t]] += deltas[t];
    s.cache.cost += cost_delta;
    std::copy(v_new.begin(), v_new.end(), column.begin());
  }

  /// Recomputes the cache from scratch.
  void refresh(IterateState<T>& s) const { s.cache = compute_cache(*problem_, s.factors); }

 private:
  friend class ColumnObjective<T>;
  const SdpProblem<T>* problem_;
  ColumnSlices<T> slices_;
  mutable LagrangianStats stats_;
};

/// Value of the augmented Lagrangian at the state's cached iterate.
template <class T>
T eval_auglag(const LagrangianModel<T>& model, const IterateState<T>& s) {
  return model.value(s);
}

template <class T>
Factors<T> full_gradient(const LagrangianModel<T>& model, const IterateState<T>& s) {
  return model.gradient(s);
}

/// L(Vbar(v_trial)) and its gradient in v_i.
template <class T>
std::pair<T, std::vector<T>> column_objective_grad(const LagrangianModel<T>& model,
                                                   const IterateState<T>& s, int block, int col,
                                                   std::span<const T> v_trial) {
  auto obj = model.column(s, block, col);
  std::vector<T> g(v_trial.size());
  T delta = obj.evaluate(v_trial, g);
  return {model.value(s) + delta, std::move(g)};
}

template <class T>
void commit_column(const LagrangianModel<T>& model, IterateState<T>& s, int block, int col,
                   std::span<const T> v_new) {
  model.commit(s, block, col, v_new);
}

}  // namespace amix
