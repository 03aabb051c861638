#include "unduloid/functionals.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

namespace unduloid {

namespace {

ReferenceIntegrals<double> reference_for(const UnduloidShape& shape) {
  if (!(shape.s > 0 && shape.s < 1))
    throw Error(ErrorCode::OutOfDomain, "shape parameter s must lie in (0, 1)");
  return reference_integrals<double>(shape.slab.n, shape.s);
}

// Second-order polynomial extrapolation to delta = 0 from deltas d, 2d, 4d.
struct Extrapolated {
  double value;
  double change;  // |two-level - one-level|
};

Extrapolated extrapolate_linear_grid(double f_d, double f_2d, double f_4d) {
  const double r1 = 2.0 * f_d - f_2d;
  const double r1b = 2.0 * f_2d - f_4d;
  const double r2 = (4.0 * r1 - r1b) / 3.0;
  return {r2, std::abs(r2 - r1)};
}

constexpr double kLimitRelTol = 1e-3;

}  // namespace

double area(const UnduloidShape& shape) {
  const int n = shape.slab.n;
  const double a_n = unit_sphere_volume<double>(n);
  if (shape.is_cylinder()) return a_n * ipow(shape.r_bulge, n) * shape.slab.width();
  return a_n * reference_for(shape).area_integral * ipow(shape.r_bulge, n + 1);
}

double volume(const UnduloidShape& shape) {
  const int n = shape.slab.n;
  const double a_n = unit_sphere_volume<double>(n);
  if (shape.is_cylinder()) return a_n / double(n + 1) * ipow(shape.r_bulge, n + 1) * shape.slab.width();
  return a_n / double(n + 1) * reference_for(shape).volume_integral * ipow(shape.r_bulge, n + 2);
}

double mean_curvature(const UnduloidShape& shape) {
  const int n = shape.slab.n;
  const double scale = ipow(shape.r_bulge, n);
  for (const double r : {shape.r_neck, shape.r_bulge})
    if (std::abs(first_integral_residual(shape, r, 0.0)) > 1e-10 * scale)
      throw Error(ErrorCode::InconsistentShape,
                  fmt::format("radius {:.16g} does not satisfy the first integral with H = {:.16g}", r, shape.H));
  for (int k = 1; k <= 5; ++k) {
    const double h = shape.r_neck + (shape.r_bulge - shape.r_neck) * double(k) / 6.0;
    double h_z = 0.0;
    double h_zz = 0.0;
    if (!shape.is_cylinder()) {
      // h_z^2 = h^{2n}/N^2 - 1 along the profile, hence
      // h_zz = n h^{2n-1}/N^2 + (n+1) H h^{3n}/N^3.
      const double hn = ipow(h, n);
      const double N = shape.c - shape.H * hn * h;
      h_z = slope_from_first_integral(shape, h);
      h_zz = double(n) * hn * hn / (h * N * N) + double(n + 1) * shape.H * hn * hn * hn / (N * N * N);
    }
    const double W = std::sqrt(1.0 + h_z * h_z);
    const double pointwise = (h_zz / (W * W * W) - double(n) / (h * W)) / double(n + 1);
    if (std::abs(pointwise - shape.H) > 1e-8 * std::abs(shape.H))
      throw Error(ErrorCode::InconsistentShape,
                  fmt::format("pointwise mean curvature {:.16g} differs from H = {:.16g} at h = {:.6g}",
                              pointwise, shape.H, h));
  }
  return shape.H;
}

GeometricQuantities geometric_quantities(const UnduloidShape& shape) {
  return {shape.s, area(shape), volume(shape), mean_curvature(shape),
          unit_sphere_volume<double>(shape.slab.n)};
}

EndpointLimits endpoint_derivative_limits(int n) {
  const FixedSlabFamily<double> fam(n);
  std::array<FamilyDerivatives<double>, 3> d;
  const std::array<double, 3> deltas = {1e-3, 2e-3, 4e-3};
  for (std::size_t i = 0; i < 3; ++i) d[i] = family_derivatives(fam, 1.0 - deltas[i]);

  EndpointLimits out;
  const auto h = extrapolate_linear_grid(d[0].H.value, d[1].H.value, d[2].H.value);
  const auto v = extrapolate_linear_grid(d[0].V.value, d[1].V.value, d[2].V.value);
  out.H_prime = std::abs(h.value);
  out.V_prime = std::abs(v.value);
  out.H_converged = h.change <= kLimitRelTol * std::abs(h.value);
  out.V_converged = v.change <= kLimitRelTol * std::abs(v.value);
  return out;
}

FamilyCurves family_curves(int n, std::span<const double> grid) {
  const FixedSlabFamily<double> fam(n);
  FamilyCurves out;
  out.H_curve.n = n;
  out.V_curve.n = n;
  double prev = 0.0;
  for (const double s : grid) {
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::OutOfDomain, "curve grid must lie inside (0, 1)");
    if (!out.H_curve.samples.empty() && !(s > prev))
      throw Error(ErrorCode::InvalidArgument, "curve grid must be strictly increasing");
    prev = s;
    const auto d = family_derivatives(fam, s);
    out.H_curve.samples.push_back({s, d.H.value});
    out.V_curve.samples.push_back({s, d.V.value});
  }
  const auto lim = endpoint_derivative_limits(n);
  out.H_curve.normalization = lim.H_prime;
  out.H_curve.normalization_converged = lim.H_converged;
  out.V_curve.normalization = lim.V_prime;
  out.V_curve.normalization_converged = lim.V_converged;
  return out;
}

int sign_changes(const FamilyCurve& curve) {
  int changes = 0;
  int last = 0;
  for (const auto& p : curve.samples) {
    const int sg = (p.value > 0) - (p.value < 0);
    if (sg == 0) continue;
    if (last != 0 && sg != last) ++changes;
    last = sg;
  }
  return changes;
}

}  // namespace unduloid
