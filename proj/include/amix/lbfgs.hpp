#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "amix/scalar.hpp"

namespace amix {

template <class T>
struct InnerConfig {
  int memory = 10;
  T eps = T(0.01);    // absolute gradient tolerance
  T delta = T(0.01);  // relative to the gradient at the start point
  int max_evals = 1000;
  // Line-searched steps taken before the stop rule may end the search; a
  // zero gradient still returns at once.
  int min_steps = 0;
};

template <class T>
struct InnerResult {
  std::vector<T> v;
  T value = T(0.0);
  int evals = 0;
  bool converged = false;
  bool nonfinite = false;
};

namespace detail {

template <class T>
T inf_norm(std::span<const T> x) {
  T m(0.0);
  for (const auto& v : x) m = max_of(m, abs_value(v));
  return m;
}

template <class T>
T dot_product(std::span<const T> a, std::span<const T> b) {
  T s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
bool all_finite(std::span<const T> x) {
  for (const auto& v : x) {
    if (!is_finite(v)) return false;
  }
  return true;
}

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db),
// clamped into [lo, hi]; falls back to bisection.
template <class T>
T cubic_step(T a, T fa, T da, T b, T fb, T db, T lo, T hi) {
  T d1 = da + db - T(3.0) * (fa - fb) / (a - b);
  T disc = d1 * d1 - da * db;
  T mid = (lo + hi) * T(0.5);
  if (!(disc >= T(0.0))) return mid;
  T d2 = square_root(disc);
  if (b < a) d2 = -d2;
  T denom = db - da + T(2.0) * d2;
  if (denom == T(0.0)) return mid;
  T x = b - (b - a) * (db + d2 - d1) / denom;
  if (!is_finite(x) || x < lo || x > hi) return mid;
  return x;
}

}  // namespace detail

/// Limited-memory BFGS on a k-dimensional objective with a strong Wolfe
/// line search (c1 = 1e-4, c2 = 0.9).
///
/// Stops once ||g||_inf < max(eps, delta * ||g(v_start)||_inf), checked at
/// the start point too unless `min_steps` asks for progress first. The returned point never has a higher value than
/// v_start. `objective(v, g)` returns the value and writes the gradient.
template <class T, class Objective>
InnerResult<T> minimize_column(Objective&& objective, std::span<const T> v_start,
                               const InnerConfig<T>& config) {
  const std::size_t k = v_start.size();
  const T c1(1e-4), c2(0.9);

  InnerResult<T> res;
  res.v.assign(v_start.begin(), v_start.end());
  std::vector<T> x(v_start.begin(), v_start.end());
  std::vector<T> g(k), g_trial(k), x_trial(k), d(k);

  T fx = objective(std::span<const T>(x), std::span<T>(g));
  res.evals = 1;
  res.value = fx;
  if (!is_finite(fx) || !detail::all_finite<T>(g)) {
    res.nonfinite = true;
    return res;
  }
  const T threshold = max_of(config.eps, config.delta * detail::inf_norm<T>(g));
  if (detail::inf_norm<T>(g) == T(0.0) ||
      (config.min_steps <= 0 && detail::inf_norm<T>(g) < threshold)) {
    res.converged = true;
    return res;
  }
  int steps = 0;

  struct Pair {
    std::vector<T> s, y;
    T rho;
  };
  std::deque<Pair> history;
  std::vector<T> alpha(static_cast<std::size_t>(std::max(config.memory, 1)));

  auto evaluate = [&](T step) -> T {
    for (std::size_t i = 0; i < k; ++i) x_trial[i] = x[i] + step * d[i];
    ++res.evals;
    return objective(std::span<const T>(x_trial), std::span<T>(g_trial));
  };

  while (res.evals < config.max_evals) {
    // Two-loop recursion: d = -H g.
    for (std::size_t i = 0; i < k; ++i) d[i] = -g[i];
    for (std::size_t h = history.size(); h-- > 0;) {
      const auto& p = history[h];
      alpha[h] = p.rho * detail::dot_product<T>(p.s, d);
      for (std::size_t i = 0; i < k; ++i) d[i] -= alpha[h] * p.y[i];
    }
    if (!history.empty()) {
      const auto& last = history.back();
      T gamma = detail::dot_product<T>(last.s, last.y) / detail::dot_product<T>(last.y, last.y);
      for (auto& di : d) di *= gamma;
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const auto& p = history[h];
      T beta = p.rho * detail::dot_product<T>(p.y, d);
      for (std::size_t i = 0; i < k; ++i) d[i] += (alpha[h] - beta) * p.s[i];
    }
    T dphi0 = detail::dot_product<T>(g, d);
    if (!(dphi0 < T(0.0))) {
      history.clear();
      for (std::size_t i = 0; i < k; ++i) d[i] = -g[i];
      dphi0 = detail::dot_product<T>(g, d);
    }

    T step(1.0);
    if (history.empty()) {
      T gnorm = square_root(detail::dot_product<T>(g, g));
      if (gnorm > T(1.0)) step = T(1.0) / gnorm;
    }

    // Strong Wolfe search: bracketing phase followed by zoom.
    const T phi0 = fx;
    T lo(0.0), f_lo = phi0, d_lo = dphi0;
    T hi(0.0), f_hi(0.0), d_hi(0.0);
    bool bracketed = false;
    bool accepted = false;
    T f_acc(0.0);
    T step_acc(0.0);
    std::vector<T> g_acc(k);

    auto accept = [&](T a, T f) {
      accepted = true;
      step_acc = a;
      f_acc = f;
      g_acc = g_trial;
    };

    T a = step;
    while (res.evals < config.max_evals) {
      T f = evaluate(a);
      if (!is_finite(f) || !detail::all_finite<T>(g_trial)) {
        res.nonfinite = true;
        res.v.assign(v_start.begin(), v_start.end());
        res.value = T(0.0);
        res.converged = false;
        return res;
      }
      T da = detail::dot_product<T>(g_trial, d);
      if (!bracketed) {
        if (f > phi0 + c1 * a * dphi0 || (lo > T(0.0) && f >= f_lo)) {
          hi = a, f_hi = f, d_hi = da;
          bracketed = true;
        } else if (abs_value(da) <= -c2 * dphi0) {
          accept(a, f);
          break;
        } else if (da >= T(0.0)) {
          hi = lo, f_hi = f_lo, d_hi = d_lo;
          lo = a, f_lo = f, d_lo = da;
          bracketed = true;
        } else {
          lo = a, f_lo = f, d_lo = da;
          a = a * T(4.0);
          continue;
        }
      } else {
        if (f > phi0 + c1 * a * dphi0 || f >= f_lo) {
          hi = a, f_hi = f, d_hi = da;
        } else {
          if (abs_value(da) <= -c2 * dphi0) {
            accept(a, f);
            break;
          }
          if (da * (hi - lo) >= T(0.0)) {
            hi = lo, f_hi = f_lo, d_hi = d_lo;
          }
          lo = a, f_lo = f, d_lo = da;
        }
      }
      // Next trial inside the bracket, kept away from its ends.
      T left = lo < hi ? lo : hi;
      T right = lo < hi ? hi : lo;
      T width = right - left;
      if (!(width > std::numeric_limits<T>::epsilon() * max_of(T(1.0), right))) break;
      a = detail::cubic_step(lo, f_lo, d_lo, hi, f_hi, d_hi, left + T(0.1) * width,
                             right - T(0.1) * width);
    }

    if (!accepted) {
      // No Wolfe point; keep the best sufficient-decrease point, if any.
      if (lo > T(0.0) && f_lo < phi0) {
        for (std::size_t i = 0; i < k; ++i) x[i] += lo * d[i];
        fx = f_lo;
        res.v = x;
        res.value = fx;
      }
      return res;
    }

    std::vector<T> s(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
      s[i] = step_acc * d[i];
      y[i] = g_acc[i] - g[i];
      x[i] += s[i];
    }
    fx = f_acc;
    g = g_acc;
    res.v = x;
    res.value = fx;

    T sy = detail::dot_product<T>(s, y);
    T sn = square_root(detail::dot_product<T>(s, s));
    T yn = square_root(detail::dot_product<T>(y, y));
    if (sy > T(1e-12) * sn * yn) {
      if (static_cast<int>(history.size()) == std::max(config.memory, 1)) history.pop_front();
      history.push_back({std::move(s), std::move(y), T(1.0) / sy});
    }

    if (++steps >= config.min_steps && detail::inf_norm<T>(g) < threshold) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace amix
