#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "unduloid/functionals.hpp"

using namespace unduloid;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

// Fit f(d) = a + b d + c d ln d through three points and return a.
double limit_with_log(double d1, double f1, double d2, double f2, double d3, double f3) {
  const double m[3][4] = {{1, d1, d1 * std::log(d1), f1}, {1, d2, d2 * std::log(d2), f2}, {1, d3, d3 * std::log(d3), f3}};
  double a[3][4];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = m[i][j];
  for (int k = 0; k < 3; ++k)
    for (int i = k + 1; i < 3; ++i) {
      const double f = a[i][k] / a[k][k];
      for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
    }
  double x[3];
  for (int i = 2; i >= 0; --i) {
    double r = a[i][3];
    for (int j = i + 1; j < 3; ++j) r -= a[i][j] * x[j];
    x[i] = r / a[i][i];
  }
  return x[0];
}

}  // namespace

TEST_CASE("cylinder area and volume") {
  for (int n : {1, 2, 7}) {
    const double r = 0.6, L = 1.3;
    const auto c = cylinder_shape(SlabConfig{n, 0, L}, r);
    const double a_n = unit_sphere_volume<double>(n);
    CHECK(area(c) == doctest::Approx(a_n * std::pow(r, n) * L).epsilon(1e-14));
    CHECK(volume(c) == doctest::Approx(a_n * std::pow(r, n + 1) * L / (n + 1)).epsilon(1e-14));
  }
  CHECK(unit_sphere_volume<double>(1) == doctest::Approx(2 * std::numbers::pi));
  CHECK(unit_sphere_volume<double>(2) == doctest::Approx(4 * std::numbers::pi));
}

TEST_CASE("near-cylinder unduloid approaches the cylinder") {
  const int n = 4;
  const auto u = solve_shape(SlabConfig{n, 0, 1}, kSMin);
  const auto c = cylinder_shape(SlabConfig{n, 0, 1}, 0.5 * (u.r_neck + u.r_bulge));
  CHECK(area(u) == doctest::Approx(area(c)).epsilon(1e-5));
  CHECK(volume(u) == doctest::Approx(volume(c)).epsilon(1e-5));
  CHECK(mean_curvature(u) == doctest::Approx(c.H).epsilon(1e-3));
}

TEST_CASE("hemisphere limit for n = 1") {
  // Unit bulge radius, neck radius d -> 0: a hemisphere of the unit sphere in R^3.
  auto at = [](double d) {
    const auto r = reference_integrals<double>(1, 1.0 - d, 1e-14);
    const double a_n = 2 * std::numbers::pi;
    return std::array<double, 2>{a_n * r.area_integral, a_n / 2 * r.volume_integral};
  };
  const double d1 = 1e-4, d2 = 2e-4, d3 = 4e-4;
  const auto f1 = at(d1), f2 = at(d2), f3 = at(d3);
  CHECK(limit_with_log(d1, f1[0], d2, f2[0], d3, f3[0]) == doctest::Approx(2 * std::numbers::pi).epsilon(1e-6));
  CHECK(limit_with_log(d1, f1[1], d2, f2[1], d3, f3[1]) == doctest::Approx(2 * std::numbers::pi / 3).epsilon(1e-6));
}

TEST_CASE("mean curvature checks the shape") {
  const auto u = solve_shape(SlabConfig{3, 0, 1}, 0.4);
  CHECK(mean_curvature(u) == u.H);
  auto bad = u;
  bad.c *= 1.05;
  CHECK(code_of([&] { mean_curvature(bad); }) == ErrorCode::InconsistentShape);
  const auto g = geometric_quantities(u);
  CHECK(g.A == area(u));
  CHECK(g.V == volume(u));
}

TEST_CASE("homothety of area and volume") {
  const double t = 1.7;
  for (int n : {2, 8}) {
    const auto a = solve_shape(SlabConfig{n, 0, 1}, 0.6);
    const auto b = solve_shape(SlabConfig{n, 0, t}, 0.6);
    CHECK(area(b) == doctest::Approx(area(a) * std::pow(t, n + 1)).epsilon(1e-12));
    CHECK(volume(b) == doctest::Approx(volume(a) * std::pow(t, n + 2)).epsilon(1e-12));
  }
}

TEST_CASE("finite differences") {
  const auto d = d_ds<double>([](double x) { return x * x * x; }, 0.5);
  CHECK(d.value == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(d.error < 1e-8);
  const auto e = d_ds<double>([](double x) { return std::sin(x); }, 0.999);
  CHECK(e.value == doctest::Approx(std::cos(0.999)).epsilon(1e-8));
  const auto s2 = d2_ds2_components<double, 1>([](double x) { return std::array<double, 1>{std::exp(x)}; }, 0.3);
  CHECK(s2[0].value == doctest::Approx(std::exp(0.3)).epsilon(1e-9));
  CHECK(code_of([] { d_ds<double>([](double x) { return x; }, 1.0); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([] { d_ds<double>([](double x) { return x; }, 0.5, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { d_ds<double>([](double x) { return std::sin(100 * x); }, 0.5, 0.05); }) ==
        ErrorCode::StepTooLarge);
}

TEST_CASE("H increases along the family for n = 6") {
  const FixedSlabFamily<double> fam(6);
  for (double s : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) CHECK(family_derivatives(fam, s).H.value > 0);
}

TEST_CASE("critical cylinder value of H") {
  const FixedSlabFamily<double> fam(5, 2.0);
  CHECK(fam.H(1e-5) == doctest::Approx(fam.H_critical_cylinder()).epsilon(1e-4));
}

TEST_CASE("area and volume derivatives are tied by H") {
  for (int n : {1, 7, 10}) {
    const FixedSlabFamily<double> fam(n);
    for (double s : {0.2, 0.5, 0.8}) {
      const auto d = family_derivatives(fam, s);
      const double rhs = -double(n + 1) * fam.H(s) * d.V.value;
      CHECK(std::abs(d.A.value - rhs) <= 1e-6 * std::max(std::abs(d.A.value), std::abs(d.V.value)));
    }
  }
}

TEST_CASE("volume derivative equals the flux of the normal speed") {
  // dV/ds = a_n ∫ h^n ∂h/∂s dz on the fixed slab; ∂h/∂s is taken at fixed z.
  const int n = 3;
  const double s = 0.5, ds = 1e-4;
  const int m = 4096;
  const auto p0 = sample_profile(solve_shape(SlabConfig{n, 0, 1}, s - ds), m);
  const auto p1 = sample_profile(solve_shape(SlabConfig{n, 0, 1}, s + ds), m);
  const auto pm = sample_profile(solve_shape(SlabConfig{n, 0, 1}, s), m);
  double sum = 0;
  for (int j = 0; j <= m; ++j) {
    const double w = (j == 0 || j == m) ? 0.5 : 1.0;
    const double dh = (p1.nodes[j].h - p0.nodes[j].h) / (2 * ds);
    sum += w * std::pow(pm.nodes[j].h, n) * dh;
  }
  sum *= unit_sphere_volume<double>(n) / m;
  const FixedSlabFamily<double> fam(n);
  CHECK(sum == doctest::Approx(family_derivatives(fam, s).V.value).epsilon(1e-6));
}

TEST_CASE("family curves") {
  std::vector<double> grid;
  for (int k = 1; k < 100; ++k) grid.push_back(k / 100.0);
  const auto c7 = family_curves(7, grid);
  CHECK(sign_changes(c7.H_curve) == 2);
  CHECK(sign_changes(c7.V_curve) == 2);
  CHECK(c7.H_curve.normalization_converged);
  CHECK(c7.V_curve.normalization_converged);
  CHECK(c7.H_curve.normalization > 0);

  const auto c1 = family_curves(1, std::vector<double>{0.5});
  CHECK_FALSE(c1.H_curve.normalization_converged);

  CHECK(code_of([] { family_curves(7, std::vector<double>{0.5, 0.4}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { family_curves(7, std::vector<double>{0.0, 0.4}); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("sign changes skip zeros") {
  FamilyCurve c;
  c.samples = {{0.1, 1}, {0.2, 0}, {0.3, -1}, {0.4, -2}, {0.5, 3}};
  CHECK(sign_changes(c) == 2);
}
