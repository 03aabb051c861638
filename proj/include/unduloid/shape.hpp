#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <vector>

#include "unduloid/error.hpp"
#include "unduloid/reference.hpp"

namespace unduloid {

inline constexpr double kSMin = 1e-3;
inline constexpr double kSMax = 1.0 - 1e-3;

/// Two parallel hyperplanes {z = z1}, {z = z2} in R^{n+2}.
struct SlabConfig {
  int n = 1;
  double z1 = 0.0;
  double z2 = 1.0;

  double width() const { return z2 - z1; }
  void validate() const;
};

/// Half-period unduloid with its neck on {z = z1} and its bulge on {z = z2}.
/// H < 0 is the mean curvature with respect to the outward normal, c the
/// first-integral constant h^n / sqrt(1 + h_z^2) + H h^{n+1}.
struct UnduloidShape {
  SlabConfig slab;
  double s = 0.0;
  double r_neck = 0.0;
  double r_bulge = 0.0;
  double H = 0.0;
  double c = 0.0;
  double scale = 1.0;  // homothety factor from the unit-bulge reference

  bool is_cylinder() const { return r_neck == r_bulge; }
};

struct ProfileNode {
  double z;
  double h;
  double h_z;
};

struct ProfileCurve {
  UnduloidShape shape;
  std::vector<ProfileNode> nodes;
  double residual_max = 0.0;
};

template <class Real>
struct FirstIntegral {
  Real H;
  Real c;
};

/// H and c from the neck and bulge conditions r^n + H r^{n+1} = c.
template <class Real>
FirstIntegral<Real> first_integral_constants(int n, Real r_neck, Real r_bulge) {
  using std::abs;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 1");
  if (!(r_neck > 0 && r_neck < r_bulge))
    throw Error(ErrorCode::InvalidArgument, "first_integral_constants: need 0 < r_neck < r_bulge");
  const Real s = (r_bulge - r_neck) / r_bulge;
  if (s <= 16 * std::numeric_limits<Real>::epsilon())
    throw Error(ErrorCode::DegenerateRadii, "neck and bulge radii coincide; use the cylinder");
  const auto k = reference_constants<Real>(n, s);
  return {k.H / r_bulge, k.c * ipow(r_bulge, n)};
}

/// z-extent from neck to bulge, r_bulge * P_ref(s).
template <class Real>
Real half_period(int n, Real r_neck, Real r_bulge, Real tol = Real(1e-12)) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 1");
  if (!(r_neck > 0 && r_neck < r_bulge))
    throw Error(ErrorCode::InvalidArgument, "half_period: need 0 < r_neck < r_bulge");
  const Real s = (r_bulge - r_neck) / r_bulge;
  if (s <= 16 * std::numeric_limits<Real>::epsilon())
    throw Error(ErrorCode::DegenerateRadii, "neck and bulge radii coincide; use the cylinder");
  return r_bulge * reference_integrals<Real>(n, s, tol).half_period;
}

/// The unique half-period unduloid with r_neck / r_bulge = 1 - s spanning the slab.
UnduloidShape solve_shape(const SlabConfig& slab, double s);

/// Cylinder of radius r spanning the slab (the s = 0 member of the family).
UnduloidShape cylinder_shape(const SlabConfig& slab, double r);

/// Critical cylinder radius sqrt(n) L / pi.
double critical_radius(int n, double L);

/// h_zz from the CMC equation.
double profile_curvature(const UnduloidShape& shape, double h, double h_z);

/// h^n / sqrt(1 + h_z^2) + H h^{n+1} - c.
double first_integral_residual(const UnduloidShape& shape, double h, double h_z);

/// h_z recovered from the first integral (non-negative branch).
double slope_from_first_integral(const UnduloidShape& shape, double h);

/// Samples m + 1 uniformly spaced nodes by integrating the CMC equation
/// from the neck. Throws ResidualTooLarge if the first integral drifts.
ProfileCurve sample_profile(const UnduloidShape& shape, int m);

/// CSV with header z,h,h_z and 17 significant digits.
void write_profile_csv(std::ostream& os, const ProfileCurve& profile);

}  // namespace unduloid
