#pragma once

// Double-exponential (tanh-sinh) quadrature on a finite interval.
//
// The rule never samples the endpoints, and it clusters nodes towards them
// double-exponentially, so integrands with inverse-square-root endpoint
// singularities converge at the same rate as smooth ones. Integrands may be
// written either as f(x) or as f(x, dl, dr), where dl = x - a and dr = b - x
// are delivered without cancellation; the second form is what lets a caller
// factor an endpoint zero exactly out of a denominator.
//
// All routines are templated on the scalar type and only use ADL-visible
// math functions, so `long double` (or any type with the usual <cmath>
// overloads and std::numeric_limits) works unchanged.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "unduloid/error.hpp"

namespace unduloid {

enum class IntegrandClass { Smooth, InverseSqrtLeft, InverseSqrtRight, InverseSqrtBoth };

template <class Real>
struct QuadratureResult {
  Real value{};
  Real error_estimate{};
  int evaluations = 0;
  int levels = 0;
  std::vector<Real> level_values;  // I_0, I_1, ... (one entry per level)
};

template <class Real, std::size_t K>
struct QuadratureVectorResult {
  std::array<Real, K> value{};
  std::array<Real, K> error_estimate{};
  int evaluations = 0;
  int levels = 0;
};

template <class Real>
struct QuadratureOptions {
  // Relative to the natural scale max(|I|, ∫|f|).
  Real tol = Real(1e-12);
  int min_level = 3;
  int max_level = 12;
};

namespace detail {

template <class Real>
Real tanh_sinh_tmax() {
  using std::asinh;
  using std::log;
  // Keep the endpoint complement 2 e^{-pi sinh t} above the smallest normal.
  const Real span = -log(std::numeric_limits<Real>::min()) * Real(0.97);
  return asinh(span / std::numbers::pi_v<Real>);
}

template <class Real, std::size_t K, class Sample>
QuadratureVectorResult<Real, K> tanh_sinh_core(Sample&& sample, Real a, Real b,
                                               const QuadratureOptions<Real>& opt,
                                               std::vector<Real>* trace) {
  using std::abs;
  using std::cosh;
  using std::exp;
  using std::isfinite;
  using std::sinh;

  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "integrate: require a < b");
  if (!(opt.tol > 0)) throw Error(ErrorCode::InvalidArgument, "integrate: require tol > 0");

  constexpr Real pi = std::numbers::pi_v<Real>;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real half = (b - a) / 2;
  const Real tmax = tanh_sinh_tmax<Real>();

  QuadratureVectorResult<Real, K> out;
  std::array<Real, K> sum{};      // sum of w f over nodes at the current spacing
  std::array<Real, K> abs_sum{};  // same for |w f|
  std::array<Real, K> prev{};
  bool have_prev = false;

  // Adds the two symmetric nodes at +t and -t (one node for t = 0).
  auto add_pair = [&](Real t, std::array<Real, K>& acc, std::array<Real, K>& acc_abs) -> Real {
    const Real u = pi / 2 * sinh(t);
    const Real q = exp(-2 * u);
    const Real comp = 2 * q / (1 + q);   // 1 - x
    const Real onep = 2 / (1 + q);       // 1 + x
    const Real w = half * (pi / 2) * cosh(t) * comp * onep;
    Real largest = 0;
    auto one = [&](Real dl, Real dr, Real x) {
      if (!(dl > 0) || !(dr > 0)) return;
      const std::array<Real, K> f = sample(x, dl, dr);
      ++out.evaluations;
      for (std::size_t i = 0; i < K; ++i) {
        if (!isfinite(f[i]))
          throw Error(ErrorCode::NonFiniteSample, "integrate: non-finite integrand value");
        const Real term = w * f[i];
        acc[i] += term;
        acc_abs[i] += abs(term);
        if (abs(term) > largest) largest = abs(term);
      }
    };
    if (t == 0) {
      one(half, half, a + half);
    } else {
      const Real d_small = half * comp;
      const Real d_large = half * onep;
      one(d_large, d_small, b - d_small);
      one(d_small, d_large, a + d_small);
    }
    return largest;
  };

  for (int level = 0; level <= opt.max_level; ++level) {
    const Real step = Real(1) / Real(1LL << level);
    std::array<Real, K> lvl{};
    std::array<Real, K> lvl_abs{};
    // Level 0 visits t = 0, 1, 2, ...; later levels only the odd multiples of step.
    const long long first = level == 0 ? 0 : 1;
    const long long stride = level == 0 ? 1 : 2;
    int quiet = 0;
    for (long long j = first;; j += stride) {
      const Real t = step * Real(j);
      if (t > tmax) break;
      const Real largest = add_pair(t, lvl, lvl_abs);
      Real scale = 0;
      for (std::size_t i = 0; i < K; ++i) {
        const Real s = abs_sum[i] + lvl_abs[i];
        if (s > scale) scale = s;
      }
      quiet = (t > 1 && largest <= eps * eps * scale) ? quiet + 1 : 0;
      if (quiet >= 3) break;
    }
    for (std::size_t i = 0; i < K; ++i) {
      sum[i] += lvl[i];
      abs_sum[i] += lvl_abs[i];
    }
    std::array<Real, K> cur{};
    for (std::size_t i = 0; i < K; ++i) cur[i] = step * sum[i];
    if (trace) trace->push_back(cur[0]);
    out.levels = level + 1;
    out.value = cur;

    if (have_prev) {
      bool converged = level >= opt.min_level;
      for (std::size_t i = 0; i < K; ++i) {
        const Real err = abs(cur[i] - prev[i]);
        out.error_estimate[i] = err;
        Real natural = step * abs_sum[i];
        if (abs(cur[i]) > natural) natural = abs(cur[i]);
        if (!(err <= opt.tol * natural)) converged = false;
      }
      if (converged) return out;
    }
    prev = cur;
    have_prev = true;
  }
  throw Error(ErrorCode::NonConvergence,
              "integrate: tanh-sinh error estimate stalled above tolerance after " +
                  std::to_string(opt.max_level) + " levels");
}

// A plain f(x) cannot see distances below one ulp of the endpoint; nodes that
// round onto an endpoint are dropped rather than evaluated there.
template <class Real, class F>
auto as_sample(F& f, Real a, Real b) {
  return [&f, a, b](Real x, Real dl, Real dr) {
    if constexpr (std::is_invocable_v<F&, Real, Real, Real>) {
      return std::array<Real, 1>{static_cast<Real>(f(x, dl, dr))};
    } else {
      (void)dl;
      (void)dr;
      if (x <= a || x >= b) return std::array<Real, 1>{Real(0)};
      return std::array<Real, 1>{static_cast<Real>(f(x))};
    }
  };
}

}  // namespace detail

/// Integrates f over [a, b]. `f` is called as f(x) or f(x, x - a, b - x).
/// The same rule is used for every IntegrandClass; the class documents the
/// caller's contract (f·sqrt(distance to the singular end) bounded).
template <class Real, class F>
QuadratureResult<Real> integrate(F&& f, Real a, Real b, IntegrandClass cls,
                                 QuadratureOptions<Real> opt = {}) {
  (void)cls;
  QuadratureResult<Real> res;
  auto sample = detail::as_sample<Real>(f, a, b);
  auto r = detail::tanh_sinh_core<Real, 1>(sample, a, b, opt, &res.level_values);
  res.value = r.value[0];
  res.error_estimate = r.error_estimate[0];
  res.evaluations = r.evaluations;
  res.levels = r.levels;
  return res;
}

template <class Real, class F>
QuadratureResult<Real> integrate(F&& f, Real a, Real b, IntegrandClass cls, Real tol) {
  QuadratureOptions<Real> opt;
  opt.tol = tol;
  return integrate<Real>(std::forward<F>(f), a, b, cls, opt);
}

/// Integrates K components sharing one set of nodes. `f(x, dl, dr)` returns
/// std::array<Real, K>; convergence is required of every component.
template <class Real, std::size_t K, class F>
QuadratureVectorResult<Real, K> integrate_components(F&& f, Real a, Real b,
                                                     QuadratureOptions<Real> opt = {}) {
  return detail::tanh_sinh_core<Real, K>(f, a, b, opt, nullptr);
}

}  // namespace unduloid
