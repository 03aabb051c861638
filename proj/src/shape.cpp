#include "unduloid/shape.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

namespace unduloid {

namespace {

using State = std::array<double, 2>;

void check_s(double s) {
  if (!(s >= kSMin && s <= kSMax))
    throw Error(ErrorCode::OutOfDomain,
                fmt::format("s = {} outside [{}, {}]", s, kSMin, kSMax));
}

// Tolerance ladder for the ODE integrator; the residual gate decides when to stop.
constexpr std::array<double, 3> kOdeTolerances = {1e-13, 1e-14, 5e-16};

// Relative bound on the first-integral drift, measured against r_bulge^n,
// the size of each term in h^n / W + H h^{n+1} = c.
constexpr double kResidualBound = 1e-10;

}  // namespace

void SlabConfig::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 1");
  if (!(z2 - z1 > 0)) throw Error(ErrorCode::InvalidArgument, "slab width must be positive");
}

double critical_radius(int n, double L) { return std::sqrt(double(n)) * L / std::numbers::pi; }

UnduloidShape solve_shape(const SlabConfig& slab, double s) {
  slab.validate();
  check_s(s);
  const auto ref = reference_integrals<double>(slab.n, s);
  UnduloidShape shape;
  shape.slab = slab;
  shape.s = s;
  shape.scale = slab.width() / ref.half_period;
  shape.r_bulge = shape.scale;
  shape.r_neck = (1.0 - s) * shape.scale;
  shape.H = ref.H / shape.scale;
  shape.c = ref.c * ipow(shape.scale, slab.n);
  return shape;
}

UnduloidShape cylinder_shape(const SlabConfig& slab, double r) {
  slab.validate();
  if (!(r > 0)) throw Error(ErrorCode::InvalidArgument, "cylinder radius must be positive");
  const int n = slab.n;
  UnduloidShape shape;
  shape.slab = slab;
  shape.s = 0.0;
  shape.r_neck = r;
  shape.r_bulge = r;
  shape.H = -double(n) / (double(n + 1) * r);
  shape.c = ipow(r, n) / double(n + 1);
  shape.scale = r;
  return shape;
}

double profile_curvature(const UnduloidShape& shape, double h, double h_z) {
  const int n = shape.slab.n;
  const double w2 = 1.0 + h_z * h_z;
  return w2 * (double(n + 1) * shape.H * std::sqrt(w2) + double(n) / h);
}

double first_integral_residual(const UnduloidShape& shape, double h, double h_z) {
  const int n = shape.slab.n;
  const double hn = ipow(h, n);
  return hn / std::sqrt(1.0 + h_z * h_z) + shape.H * hn * h - shape.c;
}

double slope_from_first_integral(const UnduloidShape& shape, double h) {
  const int n = shape.slab.n;
  const double hn = ipow(h, n);
  const double N = shape.c - shape.H * hn * h;
  const double ratio = hn / N;
  return std::sqrt(std::max(0.0, ratio * ratio - 1.0));
}

ProfileCurve sample_profile(const UnduloidShape& shape, int m) {
  namespace odeint = boost::numeric::odeint;
  if (m < 64) throw Error(ErrorCode::InvalidArgument, "sample_profile: need m >= 64");
  shape.slab.validate();

  const double z1 = shape.slab.z1;
  const double L = shape.slab.width();
  std::vector<double> zs(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) zs[static_cast<std::size_t>(j)] = z1 + L * double(j) / double(m);
  zs.back() = shape.slab.z2;

  auto rhs = [&shape](const State& y, State& dy, double /*z*/) {
    dy[0] = y[1];
    dy[1] = profile_curvature(shape, y[0], y[1]);
  };

  const double term_scale = ipow(shape.r_bulge, shape.slab.n);
  ProfileCurve out;
  out.shape = shape;
  for (const double tol : kOdeTolerances) {
    out.nodes.clear();
    out.nodes.reserve(zs.size());
    State y{shape.r_neck, 0.0};
    auto stepper = odeint::make_controlled(tol * shape.r_bulge, tol,
                                           odeint::runge_kutta_fehlberg78<State>());
    odeint::integrate_times(stepper, rhs, y, zs.begin(), zs.end(), L / double(4 * m),
                            [&out](const State& st, double z) {
                              out.nodes.push_back({z, st[0], st[1]});
                            });
    out.residual_max = 0.0;
    for (const auto& nd : out.nodes)
      out.residual_max =
          std::max(out.residual_max, std::abs(first_integral_residual(shape, nd.h, nd.h_z)));
    if (out.residual_max <= kResidualBound * term_scale) return out;
  }
  throw Error(ErrorCode::ResidualTooLarge,
              fmt::format("first-integral residual {:.3e} exceeds {:.1e} * r_bulge^n",
                          out.residual_max, kResidualBound));
}

void write_profile_csv(std::ostream& os, const ProfileCurve& profile) {
  os << "z,h,h_z\n";
  for (const auto& nd : profile.nodes) os << fmt::format("{:.17g},{:.17g},{:.17g}\n", nd.z, nd.h, nd.h_z);
}

}  // namespace unduloid
