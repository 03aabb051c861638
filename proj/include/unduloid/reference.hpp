#pragma once

// The unit-bulge reference unduloid: neck radius rho = 1 - s, bulge radius 1.
//
// Along a CMC profile of revolution in R^{n+2} the quantity
//     h^n / sqrt(1 + h_z^2) + H h^{n+1} = c
// is conserved. Writing N(h) = c - H h^{n+1} gives h_z^2 = (h^{2n} - N^2) / N^2,
// so every z-integral over the half period becomes an h-integral over
// [rho, 1] with weight 1 / sqrt(D), D = h^{2n} - N^2. D factors as
//     D = (h - rho) (1 - h) G(h) K(h),   K = h^n + N > 0,
// with G a degree-(n-1) polynomial obtained by exact synthetic division.
// Keeping (h - rho) and (1 - h) as separate factors is what lets the
// quadrature resolve the inverse-square-root endpoints without cancellation.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "unduloid/error.hpp"
#include "unduloid/quadrature.hpp"

namespace unduloid {

template <class Real>
Real ipow(Real x, int n) {
  Real r = 1;
  Real b = x;
  for (unsigned e = static_cast<unsigned>(n); e; e >>= 1) {
    if (e & 1u) r *= b;
    b *= b;
  }
  return r;
}

/// n-volume of the unit n-sphere, a_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2).
template <class Real>
Real unit_sphere_volume(int n) {
  using std::pow;
  using std::tgamma;
  const Real m = Real(n + 1) / 2;
  return 2 * pow(std::numbers::pi_v<Real>, m) / tgamma(m);
}

/// Mean curvature and first-integral constant of the unit-bulge shape,
/// evaluated in a form that stays accurate for s -> 0 and s -> 1.
template <class Real>
struct ReferenceConstants {
  Real H;  // -(1 - rho^n) / (1 - rho^{n+1})
  Real c;  // rho^n s / (1 - rho^{n+1})
};

template <class Real>
ReferenceConstants<Real> reference_constants(int n, Real s) {
  using std::expm1;
  using std::log1p;
  const Real lr = log1p(-s);
  const Real one_minus_rn = -expm1(Real(n) * lr);
  const Real one_minus_rn1 = -expm1(Real(n + 1) * lr);
  const Real rho_n = ipow(Real(1) - s, n);
  return {-one_minus_rn / one_minus_rn1, rho_n * s / one_minus_rn1};
}

template <class Real>
class ReferenceUnduloid {
 public:
  ReferenceUnduloid(int n, Real s) : n_(n), s_(s), rho_(Real(1) - s) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 1");
    if (!(s > 0 && s < 1)) throw Error(ErrorCode::OutOfDomain, "s must lie in (0, 1)");
    const auto k = reference_constants<Real>(n, s);
    H_ = k.H;
    c_ = k.c;
    // g(h) = H h^{n+1} + h^n - c = (h - 1) q(h),  q = H h^n + c (h^{n-1} + ... + 1)
    // q(h) = (h - rho) e(h); G = -e.
    g_.assign(static_cast<std::size_t>(n), Real(0));
    Real e = H_;
    g_[static_cast<std::size_t>(n - 1)] = -e;
    for (int j = n - 2; j >= 0; --j) {
      e = c_ + rho_ * e;
      g_[static_cast<std::size_t>(j)] = -e;
    }
  }

  int n() const { return n_; }
  Real s() const { return s_; }
  Real rho() const { return rho_; }
  Real H() const { return H_; }
  Real c() const { return c_; }

  Real G(Real h) const {
    Real acc = 0;
    for (std::size_t j = g_.size(); j-- > 0;) acc = acc * h + g_[j];
    return acc;
  }

  /// Integrand components (P, area, volume) with dl = h - rho, dr = 1 - h:
  ///   N / sqrt(D),  h^{2n} / sqrt(D),  h^{n+1} N / sqrt(D).
  std::array<Real, 3> integrands(Real h, Real dl, Real dr) const {
    using std::sqrt;
    const Real hn = ipow(h, n_);
    const Real N = c_ - H_ * hn * h;
    // Factor-wise roots: the full product underflows at the outermost nodes.
    const Real inv = 1 / (sqrt(dl) * sqrt(dr) * sqrt(G(h)) * sqrt(hn + N));
    return {N * inv, hn * hn * inv, hn * h * N * inv};
  }

  /// dz/dh = N / sqrt(D) at a point strictly inside (rho, 1).
  Real dz_dh(Real h) const { return integrands(h, h - rho_, 1 - h)[0]; }

 private:
  int n_;
  Real s_;
  Real rho_;
  Real H_{};
  Real c_{};
  std::vector<Real> g_;
};

/// Half period and the raw area/volume integrals of the reference shape.
/// area = a_n * area_integral, volume = a_n / (n+1) * volume_integral.
template <class Real>
struct ReferenceIntegrals {
  Real half_period;
  Real area_integral;
  Real volume_integral;
  Real H;
  Real c;
  Real error_estimate;  // max over the three components
};

template <class Real>
ReferenceIntegrals<Real> reference_integrals(int n, Real s, Real tol = Real(1e-12)) {
  const ReferenceUnduloid<Real> ref(n, s);
  QuadratureOptions<Real> opt;
  opt.tol = tol;
  const auto r = integrate_components<Real, 3>(
      [&ref](Real h, Real dl, Real dr) { return ref.integrands(h, dl, dr); }, ref.rho(), Real(1),
      opt);
  Real err = 0;
  for (const Real e : r.error_estimate)
    if (e > err) err = e;
  return {r.value[0], r.value[1], r.value[2], ref.H(), ref.c(), err};
}

}  // namespace unduloid
