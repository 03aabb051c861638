#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "unduloid/error.hpp"
#include "unduloid/reference.hpp"
#include "unduloid/shape.hpp"

namespace unduloid {

struct GeometricQuantities {
  double s = 0.0;
  double A = 0.0;
  double V = 0.0;
  double H = 0.0;
  double a_n = 0.0;
};

/// Area a_n ∫ h^n sqrt(1 + h_z^2) dz, evaluated in the h-variable.
double area(const UnduloidShape& shape);

/// Enclosed volume a_n / (n+1) ∫ h^{n+1} dz between the two planes.
double volume(const UnduloidShape& shape);

/// Returns shape.H after checking the pointwise mean-curvature formula at
/// five interior points, with h_z and h_zz taken from the first integral.
/// Throws InconsistentShape on disagreement beyond 1e-8.
double mean_curvature(const UnduloidShape& shape);

GeometricQuantities geometric_quantities(const UnduloidShape& shape);

template <class Real>
struct FamilyPoint {
  Real s;
  Real H;
  Real V;
  Real A;
};

/// s -> (H, V, A) for the unduloid family fitted to a slab of fixed width.
/// Valid on the open interval (0, 1).
template <class Real>
class FixedSlabFamily {
 public:
  explicit FixedSlabFamily(int n, Real width = Real(1), Real tol = Real(1e-12))
      : n_(n), width_(width), tol_(tol), a_n_(unit_sphere_volume<Real>(n)) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 1");
    if (!(width > 0)) throw Error(ErrorCode::InvalidArgument, "slab width must be positive");
  }

  int n() const { return n_; }
  Real width() const { return width_; }
  Real tol() const { return tol_; }
  Real a_n() const { return a_n_; }

  FamilyPoint<Real> at(Real s) const {
    const auto r = reference_integrals<Real>(n_, s, tol_);
    const Real scale = width_ / r.half_period;
    const Real sn1 = ipow(scale, n_ + 1);
    return {s, r.H / scale, a_n_ / Real(n_ + 1) * r.volume_integral * sn1 * scale,
            a_n_ * r.area_integral * sn1};
  }

  Real H(Real s) const { return at(s).H; }
  Real V(Real s) const { return at(s).V; }
  Real A(Real s) const { return at(s).A; }

  /// H at the critical cylinder, -n / ((n+1) r_c) with r_c = sqrt(n) L / pi.
  Real H_critical_cylinder() const {
    using std::sqrt;
    return -sqrt(Real(n_)) * std::numbers::pi_v<Real> / (Real(n_ + 1) * width_);
  }

 private:
  int n_;
  Real width_;
  Real tol_;
  Real a_n_;
};

template <class Real>
struct DerivativeEstimate {
  Real value{};
  Real error{};
};

namespace detail {

template <class Real, std::size_t K>
std::array<Real, K> as_array(const std::array<Real, K>& v) {
  return v;
}
template <class Real, std::size_t K>
std::array<Real, K> as_array(Real v) {
  return {v};
}

template <class Real>
Real stencil_step(Real s, Real h_step, Real lo, Real hi, int reach) {
  if (!(s > lo && s < hi)) throw Error(ErrorCode::OutOfDomain, "d_ds: s outside the domain");
  if (!(h_step > 0)) throw Error(ErrorCode::InvalidArgument, "d_ds: step must be positive");
  Real h = h_step;
  h = std::min(h, (s - lo) / Real(reach + 1));
  h = std::min(h, (hi - s) / Real(reach + 1));
  return h;
}

}  // namespace detail

/// Central differences at steps h and 2h combined by one Richardson step
/// (the 5-point stencil). `f` returns Real or std::array<Real, K>; every
/// component is differentiated from the same four evaluations. The step
/// shrinks so that s ± 4h stays inside (lo, hi). `f_abs_err` is the
/// absolute accuracy of each f evaluation.
template <class Real, std::size_t K, class F>
std::array<DerivativeEstimate<Real>, K> d_ds_components(F&& f, Real s, Real h_step = Real(1e-5),
                                                        Real lo = Real(0), Real hi = Real(1),
                                                        Real f_rel_err = Real(0)) {
  using std::abs;
  const Real h = detail::stencil_step(s, h_step, lo, hi, 4);
  const auto fp1 = detail::as_array<Real, K>(f(s + h));
  const auto fm1 = detail::as_array<Real, K>(f(s - h));
  const auto fp2 = detail::as_array<Real, K>(f(s + 2 * h));
  const auto fm2 = detail::as_array<Real, K>(f(s - 2 * h));
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real rel = std::max(f_rel_err, 8 * eps);

  std::array<DerivativeEstimate<Real>, K> out;
  for (std::size_t i = 0; i < K; ++i) {
    const Real d1 = (fp1[i] - fm1[i]) / (2 * h);
    const Real d2 = (fp2[i] - fm2[i]) / (4 * h);
    const Real rich = (4 * d1 - d2) / 3;
    const Real fscale = std::max({abs(fp1[i]), abs(fm1[i]), abs(fp2[i]), abs(fm2[i])});
    const Real trunc = abs(rich - d1) / 4;
    const Real round = 2 * rel * fscale / h;
    if (abs(d1 - d2) > Real(0.1) * std::max(abs(rich), fscale))
      throw Error(ErrorCode::StepTooLarge, "d_ds: Richardson levels disagree; reduce the step");
    out[i] = {rich, trunc + round};
  }
  return out;
}

template <class Real, class F>
DerivativeEstimate<Real> d_ds(F&& f, Real s, Real h_step = Real(1e-5), Real lo = Real(0),
                              Real hi = Real(1), Real f_rel_err = Real(0)) {
  return d_ds_components<Real, 1>([&f](Real x) { return std::array<Real, 1>{f(x)}; }, s, h_step,
                                  lo, hi, f_rel_err)[0];
}

/// Second derivative from second differences at h and 2h with one Richardson step.
template <class Real, std::size_t K, class F>
std::array<DerivativeEstimate<Real>, K> d2_ds2_components(F&& f, Real s, Real h_step = Real(1e-3),
                                                          Real lo = Real(0), Real hi = Real(1),
                                                          Real f_rel_err = Real(0)) {
  using std::abs;
  const Real h = detail::stencil_step(s, h_step, lo, hi, 2);
  const auto f0 = detail::as_array<Real, K>(f(s));
  const auto fp1 = detail::as_array<Real, K>(f(s + h));
  const auto fm1 = detail::as_array<Real, K>(f(s - h));
  const auto fp2 = detail::as_array<Real, K>(f(s + 2 * h));
  const auto fm2 = detail::as_array<Real, K>(f(s - 2 * h));
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real rel = std::max(f_rel_err, 8 * eps);
  std::array<DerivativeEstimate<Real>, K> out;
  for (std::size_t i = 0; i < K; ++i) {
    const Real c1 = (fp1[i] - 2 * f0[i] + fm1[i]) / (h * h);
    const Real c2 = (fp2[i] - 2 * f0[i] + fm2[i]) / (4 * h * h);
    const Real rich = (4 * c1 - c2) / 3;
    const Real fscale = std::max({abs(f0[i]), abs(fp2[i]), abs(fm2[i])});
    out[i] = {rich, abs(rich - c1) / 4 + 8 * rel * fscale / (h * h)};
  }
  return out;
}

/// H'(s), V'(s), A'(s) sharing one stencil.
template <class Real>
struct FamilyDerivatives {
  DerivativeEstimate<Real> H;
  DerivativeEstimate<Real> V;
  DerivativeEstimate<Real> A;
};

template <class Real>
FamilyDerivatives<Real> family_derivatives(const FixedSlabFamily<Real>& fam, Real s,
                                           Real h_step = Real(1e-5)) {
  auto d = d_ds_components<Real, 3>(
      [&fam](Real x) {
        const auto p = fam.at(x);
        return std::array<Real, 3>{p.H, p.V, p.A};
      },
      s, h_step, Real(0), Real(1), fam.tol() * Real(1e-3));
  return {d[0], d[1], d[2]};
}

struct CurveSample {
  double s;
  double value;
};

struct FamilyCurve {
  int n = 0;
  std::vector<CurveSample> samples;
  double normalization = 0.0;  // extrapolated lim_{s->1} |value|
  bool normalization_converged = false;
};

struct FamilyCurves {
  FamilyCurve H_curve;
  FamilyCurve V_curve;
};

/// Limit at s -> 1 of |H'| and |V'| by polynomial extrapolation in 1 - s from
/// s = 1 - {4e-3, 2e-3, 1e-3}.
struct EndpointLimits {
  double H_prime = 0.0;
  double V_prime = 0.0;
  bool H_converged = false;
  bool V_converged = false;
};

EndpointLimits endpoint_derivative_limits(int n);

/// H'(s) and V'(s) on `grid` (ascending, inside (0, 1)), plus the s -> 1
/// limits used to normalize them.
FamilyCurves family_curves(int n, std::span<const double> grid);

/// Number of strict sign changes in a sampled curve.
int sign_changes(const FamilyCurve& curve);

}  // namespace unduloid
