#include <doctest.h>

#include <cmath>
#include <numbers>

#include "unduloid/functionals.hpp"
#include "unduloid/spectrum.hpp"

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

// Entries below 1e-20 of the peak are rounding noise and carry no sign.
int sign_changes(const std::vector<double>& v) {
  double peak = 0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  int c = 0, last = 0;
  for (double x : v) {
    if (std::abs(x) <= 1e-20 * peak) continue;
    const int sg = x > 0 ? 1 : -1;
    if (last != 0 && sg != last) ++c;
    last = sg;
  }
  return c;
}

double first_resolved(const std::vector<double>& v) {
  double peak = 0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  for (double x : v)
    if (std::abs(x) > 1e-20 * peak) return x;
  return 0;
}

}  // namespace

TEST_CASE("assembled coefficients") {
  const auto u = solve_shape(SlabConfig{4, 0, 1}, 0.5);
  const auto p = sample_profile(u, 2 * 256);
  const auto sl = assemble(p, 257);
  REQUIRE(sl.size() == 257);
  REQUIRE(sl.sigma_mid.size() == 256);
  CHECK(sl.sigma.front() == doctest::Approx(std::pow(u.r_neck, 4)).epsilon(1e-12));
  CHECK(sl.q.front() == doctest::Approx(4 * std::pow(u.r_neck, 2)).epsilon(1e-12));
  for (std::size_t i = 0; i < sl.size(); ++i) {
    CHECK(sl.sigma[i] > 0);
    CHECK(sl.q[i] > 0);
  }
  // Incompatible sampling takes the interpolating path.
  const auto coarse = assemble(sample_profile(u, 300), 257);
  for (std::size_t i = 0; i < sl.size(); ++i) CHECK(std::abs(coarse.sigma[i] - sl.sigma[i]) <= 1e-9);
  CHECK(code_of([&] { assemble(p, 258); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cylinder eigenvalues") {
  for (int n = 1; n <= 12; ++n) {
    for (double r : {0.5, 1.0, critical_radius(n, 1.0)}) {
      const auto sp = eigen(assemble_cylinder(n, r, 1.0), 5);
      for (int i = 1; i <= 5; ++i) {
        const double exact = cylinder_spectrum(n, r, 1.0, i);
        CHECK(std::abs(sp.lambdas[i - 1] - exact) <= 1e-9 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("cylinder spectrum formula") {
  CHECK(cylinder_spectrum(1, 1.0, 1.0, 1) == doctest::Approx(-1.0));
  CHECK(cylinder_spectrum(1, 1.0, std::numbers::pi, 2) == doctest::Approx(0.0));
  CHECK(cylinder_spectrum(1, 1.0, std::numbers::pi, 3) == doctest::Approx(3.0));
  CHECK(cylinder_spectrum(7, 1.0, 1.0, 2) == doctest::Approx(std::numbers::pi * std::numbers::pi - 7));
  CHECK(cylinder_spectrum(4, 2.0, 1.0, 3) == doctest::Approx((16 * std::numbers::pi * std::numbers::pi - 4) * 4));
}

TEST_CASE("critical cylinder has a zero second eigenvalue") {
  for (int n : {1, 4, 7, 10, 12}) {
    const auto sp = eigen(assemble_cylinder(n, critical_radius(n, 1.0), 1.0), 3);
    CHECK(std::abs(sp.lambdas[1]) <= 1e-10);
  }
}

TEST_CASE("unduloid eigenpairs") {
  for (int n : {2, 7, 11}) {
    for (double s : {0.2, 0.6, 0.9}) {
      const auto us = unduloid_spectrum(n, s, 4);
      const auto& sp = us.spectrum;
      REQUIRE(sp.lambdas.size() == 4);
      CHECK(sp.lambdas[0] < 0);
      CHECK(sp.lambdas[2] > 0);
      for (int i = 1; i < 4; ++i) CHECK(sp.lambdas[i] > sp.lambdas[i - 1]);
      for (int i = 0; i < 4; ++i) {
        const auto& phi = sp.eigenfunctions[i];
        CHECK(first_resolved(phi) > 0);
        CHECK(sign_changes(phi) == i);
        CHECK(inner_product(us.problem, phi, phi) == doctest::Approx(1.0).epsilon(1e-12));
        // Rayleigh quotient against the discrete eigenvalue.
        const auto Lphi = apply_operator(us.problem, phi);
        const double rq = -inner_product(us.problem, phi, Lphi);
        CHECK(std::abs(rq - sp.grid_lambdas[i]) <= 1e-9 * std::max(1.0, std::abs(rq)));
      }
      CHECK(std::abs(inner_product(us.problem, sp.eigenfunctions[0], sp.eigenfunctions[1])) <= 1e-10);
    }
  }
}

TEST_CASE("discrete operator is symmetric") {
  const auto us = unduloid_spectrum(5, 0.5, 3, 513);
  std::vector<double> u(us.problem.size()), v(us.problem.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double z = us.problem.grid[i];
    u[i] = std::cos(3 * z) + z * z;
    v[i] = std::exp(-z) * std::sin(5 * z + 1);
  }
  const double a = inner_product(us.problem, u, apply_operator(us.problem, v));
  const double b = inner_product(us.problem, v, apply_operator(us.problem, u));
  CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
}

TEST_CASE("eigenvalues scale with the slab width") {
  const int n = 6;
  const double t = 1.8;
  const auto u1 = solve_shape(SlabConfig{n, 0, 1}, 0.4);
  const auto ut = solve_shape(SlabConfig{n, 0, t}, 0.4);
  const auto s1 = eigen(assemble(sample_profile(u1, 4096)), 3);
  const auto st = eigen(assemble(sample_profile(ut, 4096)), 3);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(st.lambdas[i] - std::pow(t, n - 2) * s1.lambdas[i]) <= 1e-8 * std::max(1.0, std::abs(st.lambdas[i])));
}

TEST_CASE("eigenfunctions satisfy the Neumann condition") {
  // Relative to max |phi|; near s = 1 the neck layer is not resolved this well.
  for (int n : {1, 4, 7, 10, 12}) {
    for (double s : {0.1, 0.3, 0.5}) {
      const auto us = unduloid_spectrum(n, s, 3);
      for (const auto& phi : us.spectrum.eigenfunctions) {
        double peak = 0;
        for (double v : phi) peak = std::max(peak, std::abs(v));
        const auto [dl, dr] = boundary_derivatives(us.problem, phi);
        CHECK(std::abs(dl) <= 1e-8 * peak);
        CHECK(std::abs(dr) <= 1e-8 * peak);
      }
    }
  }
}

TEST_CASE("second variation") {
  const int n = 7;
  const auto us = unduloid_spectrum(n, 0.55, 3);
  const double a_n = unit_sphere_volume<double>(n);
  const auto& sp = us.spectrum;
  const double a1 = second_variation(us.problem, sp.eigenfunctions[0], a_n);
  CHECK(a1 == doctest::Approx(a_n * sp.lambdas[0]).epsilon(1e-6));

  const auto probe = make_volume_preserving_probe(us.problem, sp, a_n);
  CHECK(probe.volume_residual <= 1e-12);
  CHECK(probe.A2 == doctest::Approx(a_n * (probe.alpha * probe.alpha * sp.lambdas[0] + sp.lambdas[1])).epsilon(1e-6));

  std::vector<double> ramp(us.problem.grid.begin(), us.problem.grid.end());
  CHECK(code_of([&] { second_variation(us.problem, ramp, a_n); }) == ErrorCode::NonNeumannInput);

  auto fake = sp;
  // Make phi_1 orthogonal to the volume weight.
  for (std::size_t i = 0; i < fake.eigenfunctions[0].size(); ++i) fake.eigenfunctions[0][i] = 0.0;
  CHECK(code_of([&] { make_volume_preserving_probe(us.problem, fake, a_n); }) == ErrorCode::DegenerateProjection);
}

TEST_CASE("second variation at the critical cylinder") {
  const int n = 4;
  const auto sl = assemble_cylinder(n, critical_radius(n, 1.0), 1.0);
  const auto sp = eigen(sl, 3);
  const double a_n = unit_sphere_volume<double>(n);
  CHECK(std::abs(second_variation(sl, sp.eigenfunctions[1], a_n)) <= 1e-6 * a_n * std::abs(sp.lambdas[0]));
}

TEST_CASE("Pruefer shooting agrees with the grid solver") {
  for (double s : {0.3, 0.6}) {
    const auto us = unduloid_spectrum(7, s, 3);
    for (int i = 1; i <= 3; ++i) {
      const double lam = us.spectrum.lambdas[i - 1];
      const double pr = prufer_eigenvalue(us.problem, i, lam, 0.05 * std::max(1.0, std::abs(lam)));
      CHECK(std::abs(pr - lam) <= 1e-7 * std::max(1.0, std::abs(lam)));
    }
  }
}

TEST_CASE("coarse grids are rejected") {
  CHECK(code_of([] { eigen(assemble_cylinder(3, 0.5, 1.0, 17), 3, 1e-14); }) == ErrorCode::GridTooCoarse);
  CHECK(code_of([] { eigen(assemble_cylinder(3, 0.5, 1.0, 33), 2); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { eigen(assemble_cylinder(3, 0.5, 1.0, 33), 6); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { assemble_cylinder(3, 0.5, 1.0, 15); }) == ErrorCode::InvalidArgument);
}
