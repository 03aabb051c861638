#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "unduloid/shape.hpp"

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

}  // namespace

TEST_CASE("first integral constants for n = 1") {
  // Neck 1, bulge 2: H = -(2 - 1)/(4 - 1), c = 1 - H.
  const auto k = first_integral_constants<double>(1, 1.0, 2.0);
  CHECK(k.H == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(k.c == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("first integral holds at neck and bulge") {
  for (int n : {1, 2, 5, 12}) {
    for (double rn : {0.1, 0.5, 0.9}) {
      const double rb = 1.7;
      const auto k = first_integral_constants<double>(n, rn, rb);
      CHECK(std::abs(std::pow(rn, n) + k.H * std::pow(rn, n + 1) - k.c) <= 1e-14 * std::pow(rb, n));
      CHECK(std::abs(std::pow(rb, n) + k.H * std::pow(rb, n + 1) - k.c) <= 1e-14 * std::pow(rb, n));
      CHECK(k.H < 0);
    }
  }
}

TEST_CASE("degenerate radii") {
  CHECK(code_of([] { first_integral_constants<double>(3, 1.0, 1.0 + 1e-17); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { first_integral_constants<double>(3, 1.0, 1.0 + 2e-16); }) == ErrorCode::DegenerateRadii);
  CHECK(code_of([] { half_period<double>(3, 2.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("near-cylinder limits") {
  for (int n : {1, 4, 9}) {
    const double r = 0.8;
    const auto k = first_integral_constants<double>(n, r * (1 - 1e-6), r);
    CHECK(k.H == doctest::Approx(-double(n) / (double(n + 1) * r)).epsilon(1e-5));
    const double P = half_period<double>(n, r * (1 - 1e-6), r);
    CHECK(P == doctest::Approx(std::numbers::pi * r / std::sqrt(double(n))).epsilon(1e-5));
  }
}

TEST_CASE("hemisphere limit of the half period") {
  for (int n : {1, 3, 8}) {
    const double P = half_period<double>(n, 1e-7, 1.0);
    CHECK(P == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("half period scales with the bulge radius") {
  const double P1 = half_period<double>(5, 0.4, 1.0);
  const double P3 = half_period<double>(5, 1.2, 3.0);
  CHECK(std::abs(P3 - 3 * P1) <= 1e-12 * P3);
}

TEST_CASE("solve_shape fits the slab") {
  const SlabConfig slab{7, 0.25, 1.75};
  for (double s : {kSMin, 0.3, 0.7, kSMax}) {
    const auto u = solve_shape(slab, s);
    CHECK(u.s == s);
    CHECK((u.r_bulge - u.r_neck) / u.r_bulge == doctest::Approx(s).epsilon(1e-14));
    CHECK(half_period<double>(7, u.r_neck, u.r_bulge) == doctest::Approx(1.5).epsilon(1e-11));
  }
  CHECK(code_of([&] { solve_shape(slab, 0.0); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { solve_shape(slab, 1.0); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { solve_shape(slab, 5e-4); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([] { solve_shape(SlabConfig{0, 0, 1}, 0.5); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { solve_shape(SlabConfig{2, 1, 1}, 0.5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("homothety of the slab") {
  const double t = 2.5;
  for (int n : {1, 6, 11}) {
    const auto a = solve_shape(SlabConfig{n, 0, 1}, 0.45);
    const auto b = solve_shape(SlabConfig{n, 0, t}, 0.45);
    CHECK(std::abs(b.r_neck - t * a.r_neck) <= 1e-12 * b.r_neck);
    CHECK(std::abs(b.r_bulge - t * a.r_bulge) <= 1e-12 * b.r_bulge);
    CHECK(std::abs(b.H - a.H / t) <= 1e-12 * std::abs(a.H));
  }
}

TEST_CASE("critical cylinder radius") {
  CHECK(critical_radius(4, 1.0) == doctest::Approx(2.0 / std::numbers::pi));
  const auto c = cylinder_shape(SlabConfig{3, 0, 2}, 0.5);
  CHECK(c.is_cylinder());
  CHECK(c.H == doctest::Approx(-3.0 / (4.0 * 0.5)));
}

TEST_CASE("sampled profile") {
  const auto u = solve_shape(SlabConfig{7, 0, 1}, 0.5);
  const auto p = sample_profile(u, 512);
  REQUIRE(p.nodes.size() == 513);
  CHECK(p.nodes.front().z == 0.0);
  CHECK(p.nodes.back().z == 1.0);
  CHECK(std::abs(p.nodes.front().h - u.r_neck) <= 1e-15);
  CHECK(std::abs(p.nodes.back().h - u.r_bulge) <= 1e-9 * u.r_bulge);
  CHECK(std::abs(p.nodes.front().h_z) <= 1e-10);
  CHECK(std::abs(p.nodes.back().h_z) <= 1e-6);
  for (std::size_t i = 1; i < p.nodes.size(); ++i) CHECK(p.nodes[i].h > p.nodes[i - 1].h);
  CHECK(p.residual_max <= 1e-10 * std::pow(u.r_bulge, 7));

  CHECK(code_of([&] { sample_profile(u, 63); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("profile slope matches the first integral") {
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> ds(0.05, 0.95);
  std::uniform_int_distribution<int> dn(1, 12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = solve_shape(SlabConfig{dn(rng), 0, 1}, ds(rng));
    const auto p = sample_profile(u, 128);
    const auto& node = p.nodes[64];
    CHECK(std::abs(node.h_z - slope_from_first_integral(u, node.h)) <= 1e-8 * std::max(1.0, node.h_z));
  }
}

TEST_CASE("cylinder profile is flat") {
  const auto c = cylinder_shape(SlabConfig{5, 0, 1}, 0.7);
  const auto p = sample_profile(c, 64);
  for (const auto& node : p.nodes) {
    CHECK(std::abs(node.h - 0.7) <= 1e-13);
    CHECK(std::abs(node.h_z) <= 1e-13);
  }
}

TEST_CASE("profile csv") {
  const auto p = sample_profile(solve_shape(SlabConfig{2, 0, 1}, 0.3), 64);
  std::ostringstream os;
  write_profile_csv(os, p);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "z,h,h_z");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 65);
}
