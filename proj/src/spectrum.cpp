#include "unduloid/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace unduloid {

namespace {

using LD = long double;

struct Coefficients {
  double sigma;
  double q;
};

Coefficients coefficients_at(int n, double h, double h_z) {
  const double w = std::sqrt(1.0 + h_z * h_z);
  const double hn = ipow(h, n);
  return {hn / (w * w * w), double(n) * hn / (h * h * w)};
}

// Quintic Hermite interpolation of (h, h_z) on a uniformly sampled profile.
struct HermiteSample {
  double h;
  double h_z;
};

HermiteSample hermite_at(const ProfileCurve& profile, double z) {
  const auto& nodes = profile.nodes;
  const std::size_t m = nodes.size() - 1;
  const double z1 = nodes.front().z;
  const double dz = (nodes.back().z - z1) / double(m);
  double pos = (z - z1) / dz;
  std::size_t k = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, double(m - 1)));
  const double t = std::clamp(pos - double(k), 0.0, 1.0);
  const auto& a = nodes[k];
  const auto& b = nodes[k + 1];
  const double p0 = a.h, p1 = b.h;
  const double d0 = a.h_z * dz, d1 = b.h_z * dz;
  const double dd0 = profile_curvature(profile.shape, a.h, a.h_z) * dz * dz;
  const double dd1 = profile_curvature(profile.shape, b.h, b.h_z) * dz * dz;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h = p0 * (1 - 10 * t3 + 15 * t4 - 6 * t5) + d0 * (t - 6 * t3 + 8 * t4 - 3 * t5) +
                   dd0 * 0.5 * (t2 - 3 * t3 + 3 * t4 - t5) + dd1 * 0.5 * (t3 - 2 * t4 + t5) +
                   d1 * (-4 * t3 + 7 * t4 - 3 * t5) + p1 * (10 * t3 - 15 * t4 + 6 * t5);
  const double dh = p0 * (-30 * t2 + 60 * t3 - 30 * t4) + d0 * (1 - 18 * t2 + 32 * t3 - 15 * t4) +
                    dd0 * 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4) +
                    dd1 * 0.5 * (3 * t2 - 8 * t3 + 5 * t4) + d1 * (-12 * t2 + 28 * t3 - 15 * t4) +
                    p1 * (30 * t2 - 60 * t3 + 30 * t4);
  return {h, dh / dz};
}

void check_grid_size(int nodes) {
  if (nodes < 17 || (nodes - 1) % 4 != 0)
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("grid size {} must be >= 17 with (nodes - 1) divisible by 4", nodes));
}

// Symmetric tridiagonal matrix M^{-1/2} K M^{-1/2} for the grid with the given stride.
struct Tridiagonal {
  std::vector<LD> diag;
  std::vector<LD> off;
  std::vector<LD> mass;
};

Tridiagonal discretize(const SturmLiouvilleProblem& p, std::size_t stride) {
  const std::size_t N = (p.size() - 1) / stride + 1;
  const LD dz = LD(p.spacing()) * LD(stride);
  std::vector<LD> flux(N - 1);
  for (std::size_t j = 0; j + 1 < N; ++j)
    flux[j] = stride == 1 ? LD(p.sigma_mid[j]) : LD(p.sigma[j * stride + stride / 2]);
  Tridiagonal t;
  t.diag.resize(N);
  t.off.resize(N - 1);
  t.mass.resize(N);
  for (std::size_t j = 0; j < N; ++j) {
    t.mass[j] = (j == 0 || j + 1 == N) ? dz / 2 : dz;
    LD k = 0;
    if (j > 0) k += flux[j - 1] / dz;
    if (j + 1 < N) k += flux[j] / dz;
    k -= t.mass[j] * LD(p.q[j * stride]);
    t.diag[j] = k / t.mass[j];
  }
  for (std::size_t j = 0; j + 1 < N; ++j)
    t.off[j] = -flux[j] / dz / std::sqrt(t.mass[j] * t.mass[j + 1]);
  return t;
}

// Number of eigenvalues strictly below x (Sturm sequence via LDL^T pivots).
std::size_t count_below(const Tridiagonal& t, LD x) {
  const LD tiny = std::numeric_limits<LD>::min() * 1e4L;
  std::size_t count = 0;
  LD p = t.diag[0] - x;
  for (std::size_t j = 0;; ++j) {
    if (p < 0) ++count;
    if (j + 1 == t.diag.size()) break;
    if (p == 0) p = tiny;
    p = t.diag[j + 1] - x - t.off[j] * t.off[j] / p;
  }
  return count;
}

LD bisect_eigenvalue(const Tridiagonal& t, std::size_t index) {
  LD lo = t.diag[0], hi = t.diag[0];
  for (std::size_t j = 0; j < t.diag.size(); ++j) {
    const LD r = (j > 0 ? std::abs(t.off[j - 1]) : 0) + (j < t.off.size() ? std::abs(t.off[j]) : 0);
    lo = std::min(lo, t.diag[j] - r);
    hi = std::max(hi, t.diag[j] + r);
  }
  const LD eps = std::numeric_limits<LD>::epsilon();
  for (int it = 0; it < 400; ++it) {
    const LD mid = (lo + hi) / 2;
    if (count_below(t, mid) > index)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return (lo + hi) / 2;
}

// Inverse iteration with a partially pivoted tridiagonal LU (as in LAPACK gttrf/gttrs).
std::vector<LD> inverse_iteration(const Tridiagonal& t, LD shift) {
  const std::size_t N = t.diag.size();
  std::vector<LD> dl(t.off.begin(), t.off.end()), d(N), du(t.off.begin(), t.off.end()), du2(N, 0);
  std::vector<bool> swapped(N, false);
  for (std::size_t j = 0; j < N; ++j) d[j] = t.diag[j] - shift;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] != 0) {
        const LD f = dl[i] / d[i];
        dl[i] = f;
        d[i + 1] -= f * du[i];
      }
    } else {
      const LD f = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = f;
      const LD tmp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = tmp - f * d[i + 1];
      if (i + 2 < N) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
      swapped[i] = true;
    }
  }
  const LD tiny = std::numeric_limits<LD>::epsilon() * (std::abs(shift) + 1);
  for (auto& v : d)
    if (v == 0) v = tiny;

  std::vector<LD> y(N);
  for (std::size_t j = 0; j < N; ++j) y[j] = 1 + LD(0.01) * std::sin(LD(j) * 0.7L);
  for (int iter = 0; iter < 3; ++iter) {
    for (std::size_t i = 0; i + 1 < N; ++i) {
      if (!swapped[i]) {
        y[i + 1] -= dl[i] * y[i];
      } else {
        const LD tmp = y[i];
        y[i] = y[i + 1];
        y[i + 1] = tmp - dl[i] * y[i];
      }
    }
    y[N - 1] /= d[N - 1];
    if (N > 1) y[N - 2] = (y[N - 2] - du[N - 2] * y[N - 1]) / d[N - 2];
    for (std::size_t i = N - 2; i-- > 0;) y[i] = (y[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];
    LD norm = 0;
    for (const LD v : y) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& v : y) v /= norm;
  }
  return y;
}

}  // namespace

std::vector<double> SturmLiouvilleProblem::volume_weight() const {
  std::vector<double> w(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) w[j] = ipow(h[j], n);
  return w;
}

SturmLiouvilleProblem assemble(const ProfileCurve& profile, int nodes) {
  check_grid_size(nodes);
  if (profile.nodes.size() < 2) throw Error(ErrorCode::InvalidArgument, "assemble: empty profile");
  const int n = profile.shape.slab.n;
  SturmLiouvilleProblem p;
  p.n = n;
  p.z1 = profile.nodes.front().z;
  p.z2 = profile.nodes.back().z;
  const std::size_t N = static_cast<std::size_t>(nodes);
  const std::size_t fine = 2 * (N - 1);  // intervals of the node+midpoint grid
  const std::size_t m = profile.nodes.size() - 1;

  auto sample = [&](std::size_t i) -> HermiteSample {
    if (m % fine == 0) {
      const auto& nd = profile.nodes[i * (m / fine)];
      return {nd.h, nd.h_z};
    }
    const double z = p.z1 + (p.z2 - p.z1) * double(i) / double(fine);
    return hermite_at(profile, z);
  };

  p.grid.resize(N);
  p.h.resize(N);
  p.sigma.resize(N);
  p.q.resize(N);
  p.sigma_mid.resize(N - 1);
  for (std::size_t i = 0; i <= fine; ++i) {
    const auto hs = sample(i);
    if (!(hs.h > 0)) throw Error(ErrorCode::InvalidArgument, "assemble: profile radius must be positive");
    const auto c = coefficients_at(n, hs.h, hs.h_z);
    if (i % 2 == 0) {
      const std::size_t j = i / 2;
      p.grid[j] = p.z1 + (p.z2 - p.z1) * double(j) / double(N - 1);
      p.h[j] = hs.h;
      p.sigma[j] = c.sigma;
      p.q[j] = c.q;
    } else {
      p.sigma_mid[i / 2] = c.sigma;
    }
  }
  p.grid.back() = p.z2;
  return p;
}

SturmLiouvilleProblem assemble_cylinder(int n, double r, double L, int nodes) {
  SlabConfig slab{n, 0.0, L};
  const auto shape = cylinder_shape(slab, r);
  ProfileCurve profile;
  profile.shape = shape;
  const int m = 2 * (nodes - 1);
  profile.nodes.reserve(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) profile.nodes.push_back({L * double(j) / double(m), r, 0.0});
  return assemble(profile, nodes);
}

double cylinder_spectrum(int n, double r, double L, int i) {
  if (n < 1 || i < 1 || !(r > 0) || !(L > 0))
    throw Error(ErrorCode::InvalidArgument, "cylinder_spectrum: need n, i >= 1 and r, L > 0");
  const double k = double(i - 1) * std::numbers::pi * r / L;
  return (k * k - double(n)) * std::pow(r, n - 2);
}

Spectrum eigen(const SturmLiouvilleProblem& problem, int k, double tol) {
  if (k < 3 || k > 5) throw Error(ErrorCode::InvalidArgument, "eigen: need 3 <= k <= 5");
  check_grid_size(static_cast<int>(problem.size()));
  const auto kk = static_cast<std::size_t>(k);

  std::array<std::vector<LD>, 3> levels;  // strides 4, 2, 1
  Tridiagonal fine;
  const std::array<std::size_t, 3> strides = {4, 2, 1};
  for (std::size_t l = 0; l < 3; ++l) {
    auto t = discretize(problem, strides[l]);
    for (std::size_t i = 0; i < kk; ++i) levels[l].push_back(bisect_eigenvalue(t, i));
    if (strides[l] == 1) fine = std::move(t);
  }

  Spectrum out;
  out.grid = problem.grid;
  for (std::size_t i = 0; i < kk; ++i) {
    const LD ra = (4 * levels[1][i] - levels[0][i]) / 3;
    const LD rb = (4 * levels[2][i] - levels[1][i]) / 3;
    const LD r2 = (16 * rb - ra) / 15;
    const double value = double(r2);
    const double err = double(std::abs(r2 - rb)) + 1e-13 * std::max(1.0, std::abs(value));
    if (err > tol * std::max(1.0, std::abs(value)))
      throw Error(ErrorCode::GridTooCoarse,
                  fmt::format("eigenvalue {} has extrapolation error {:.2e} above {:.1e}", i + 1, err, tol));
    out.lambdas.push_back(value);
    out.error_estimates.push_back(err);
    out.grid_lambdas.push_back(double(levels[2][i]));

    const LD shift = levels[2][i] + std::numeric_limits<LD>::epsilon() * 16 *
                                        std::max<LD>(1, std::abs(fine.diag[0]) + 2 * std::abs(fine.off[0]));
    const auto y = inverse_iteration(fine, shift);
    std::vector<double> phi(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) phi[j] = double(y[j] / std::sqrt(fine.mass[j]));
    // Near the neck phi can sit at the level of rounding noise; orient by the
    // first entry that is clearly resolved.
    double peak = 0.0;
    for (const double v : phi) peak = std::max(peak, std::abs(v));
    const auto lead = std::find_if(phi.begin(), phi.end(), [peak](double v) { return std::abs(v) > 1e-20 * peak; });
    if (lead != phi.end() && *lead < 0)
      for (auto& v : phi) v = -v;
    out.eigenfunctions.push_back(std::move(phi));
  }
  for (std::size_t i = 1; i < kk; ++i)
    if (!(out.lambdas[i] > out.lambdas[i - 1]))
      throw Error(ErrorCode::GridTooCoarse, "eigen: eigenvalues not strictly increasing");
  return out;
}

std::vector<double> apply_operator(const SturmLiouvilleProblem& p, std::span<const double> u) {
  const std::size_t N = p.size();
  if (u.size() != N) throw Error(ErrorCode::InvalidArgument, "apply_operator: size mismatch");
  const double dz = p.spacing();
  std::vector<double> out(N);
  for (std::size_t j = 0; j < N; ++j) {
    double flux = 0.0;
    if (j + 1 < N) flux += p.sigma_mid[j] * (u[j + 1] - u[j]) / dz;
    if (j > 0) flux -= p.sigma_mid[j - 1] * (u[j] - u[j - 1]) / dz;
    const double mass = (j == 0 || j + 1 == N) ? dz / 2 : dz;
    out[j] = flux / mass + p.q[j] * u[j];
  }
  return out;
}

double inner_product(const SturmLiouvilleProblem& p, std::span<const double> u, std::span<const double> v) {
  const std::size_t N = p.size();
  if (u.size() != N || v.size() != N) throw Error(ErrorCode::InvalidArgument, "inner_product: size mismatch");
  const double dz = p.spacing();
  double acc = 0.5 * (u[0] * v[0] + u[N - 1] * v[N - 1]);
  for (std::size_t j = 1; j + 1 < N; ++j) acc += u[j] * v[j];
  return acc * dz;
}

std::pair<double, double> boundary_derivatives(const SturmLiouvilleProblem& p, std::span<const double> u) {
  const std::size_t N = p.size();
  if (u.size() != N || N < 5) throw Error(ErrorCode::InvalidArgument, "boundary_derivatives: size mismatch");
  const double dz = p.spacing();
  const double left = (-25 * u[0] + 48 * u[1] - 36 * u[2] + 16 * u[3] - 3 * u[4]) / (12 * dz);
  const double right =
      (25 * u[N - 1] - 48 * u[N - 2] + 36 * u[N - 3] - 16 * u[N - 4] + 3 * u[N - 5]) / (12 * dz);
  return {left, right};
}

namespace {

struct QuadraticForm {
  double stiff;
  double potential;
};

QuadraticForm quadratic_form(const SturmLiouvilleProblem& p, std::span<const double> u) {
  const std::size_t N = p.size();
  if (u.size() != N) throw Error(ErrorCode::InvalidArgument, "second_variation: size mismatch");
  const double dz = p.spacing();
  double stiff = 0.0;
  for (std::size_t j = 0; j + 1 < N; ++j) {
    const double du = u[j + 1] - u[j];
    stiff += p.sigma_mid[j] * du * du / dz;
  }
  std::vector<double> qu(N);
  for (std::size_t j = 0; j < N; ++j) qu[j] = p.q[j] * u[j];
  return {stiff, inner_product(p, u, qu)};
}

}  // namespace

double second_variation(const SturmLiouvilleProblem& p, std::span<const double> u, double a_n) {
  const auto form = quadratic_form(p, u);
  const std::size_t N = p.size();
  // The form drops the boundary term [u sigma u']; it must be negligible.
  const auto [dl, dr] = boundary_derivatives(p, u);
  const double boundary = std::abs(u[0] * p.sigma[0] * dl) + std::abs(u[N - 1] * p.sigma[N - 1] * dr);
  const double bound = kNeumannTolerance * (form.stiff + std::abs(form.potential));
  if (boundary > bound)
    throw Error(ErrorCode::NonNeumannInput,
                fmt::format("boundary term {:.3e} exceeds {:.3e}", boundary, bound));
  return a_n * (form.stiff - form.potential);
}

SecondVariationProbe make_volume_preserving_probe(const SturmLiouvilleProblem& p, const Spectrum& spectrum,
                                                  double a_n) {
  if (spectrum.eigenfunctions.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "probe needs the first two eigenfunctions");
  const auto w = p.volume_weight();
  const auto& phi1 = spectrum.eigenfunctions[0];
  const auto& phi2 = spectrum.eigenfunctions[1];
  const double b1 = inner_product(p, w, phi1);
  const double b2 = inner_product(p, w, phi2);
  const double wnorm = std::sqrt(inner_product(p, w, w));
  if (std::abs(b1) <= 1e-10 * wnorm)
    throw Error(ErrorCode::DegenerateProjection, "volume weight is orthogonal to phi_1");
  SecondVariationProbe probe;
  probe.alpha = -b2 / b1;
  probe.u.resize(phi1.size());
  for (std::size_t j = 0; j < phi1.size(); ++j) probe.u[j] = probe.alpha * phi1[j] + phi2[j];
  probe.volume_residual = std::abs(inner_product(p, w, probe.u));
  // Eigenvectors carry the discrete Neumann condition; near a thin neck the
  // one-sided derivative used by second_variation cannot resolve it.
  const auto form = quadratic_form(p, probe.u);
  probe.A2 = a_n * (form.stiff - form.potential);
  return probe;
}

namespace {

// Total Pruefer angle at z2 for the piecewise-constant-coefficient
// approximation on cells of `stride` grid spacings, starting from the
// Neumann state phi = 1, sigma phi' = 0 (angle pi/2).
double prufer_angle(const SturmLiouvilleProblem& p, double lambda, std::size_t stride) {
  const double pi = std::numbers::pi;
  const std::size_t cells = (p.size() - 1) / stride;
  const double dz = p.spacing() * double(stride);
  double phi = 1.0, psi = 0.0;
  double theta = pi / 2;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t j = c * stride;
    const double sig = stride == 1 ? p.sigma_mid[j] : p.sigma[j + stride / 2];
    const double qq = 0.5 * (p.q[j] + p.q[j + stride]);
    const double kappa = (qq + lambda) / sig;
    const double omega = std::sqrt(std::abs(kappa));
    const double scale = sig * std::max(omega, 1e-300);
    // Re-express the running angle in this cell's coordinates, keeping its band.
    const double band = std::floor(theta / pi);
    double a = std::atan2(scale * phi, psi);
    if (a < 0) a += pi;
    theta = band * pi + a;
    const double sign_before = phi;
    if (kappa > 0) {
      const double cw = std::cos(omega * dz), sw = std::sin(omega * dz);
      const double nphi = phi * cw + psi / scale * sw;
      const double npsi = -scale * phi * sw + psi * cw;
      phi = nphi;
      psi = npsi;
      theta += omega * dz;
    } else {
      const double ch = std::cosh(omega * dz);
      const double sh = omega > 0 ? std::sinh(omega * dz) / omega : dz;
      const double nphi = phi * ch + psi / sig * sh;
      const double npsi = sig * omega * omega * phi * sh + psi * ch;
      phi = nphi;
      psi = npsi;
      double b = std::atan2(scale * phi, psi);
      if (b < 0) b += pi;
      const bool crossed = (sign_before > 0) != (phi > 0);
      theta = (std::floor(theta / pi) + (crossed ? 1.0 : 0.0)) * pi + b;
    }
    const double norm = std::hypot(phi, psi / scale);
    phi /= norm;
    psi /= norm;
  }
  // Angle in the last cell's coordinates; psi = 0 corresponds to pi/2 mod pi.
  return theta;
}

double prufer_solve(const SturmLiouvilleProblem& p, int i, double lo, double hi, std::size_t stride) {
  const double target = std::numbers::pi / 2 + double(i - 1) * std::numbers::pi;
  auto f = [&](double lam) { return prufer_angle(p, lam, stride) - target; };
  double flo = f(lo), fhi = f(hi);
  for (int grow = 0; grow < 60 && (flo > 0 || fhi < 0); ++grow) {
    const double w = hi - lo;
    if (flo > 0) {
      lo -= w;
      flo = f(lo);
    }
    if (fhi < 0) {
      hi += w;
      fhi = f(hi);
    }
  }
  if (flo > 0 || fhi < 0) throw Error(ErrorCode::NonConvergence, "prufer: could not bracket eigenvalue");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double prufer_eigenvalue(const SturmLiouvilleProblem& problem, int i, double guess, double halfwidth) {
  if (i < 1) throw Error(ErrorCode::InvalidArgument, "prufer_eigenvalue: index is 1-based");
  const double hw = std::max(halfwidth, 1e-6);
  const double fine = prufer_solve(problem, i, guess - hw, guess + hw, 1);
  const double coarse = prufer_solve(problem, i, guess - hw, guess + hw, 2);
  return (4.0 * fine - coarse) / 3.0;
}

UnduloidSpectrum unduloid_spectrum(int n, double s, int k, int nodes, double tol) {
  UnduloidSpectrum out;
  out.shape = solve_shape(SlabConfig{n, 0.0, 1.0}, s);
  const auto profile = sample_profile(out.shape, 2 * (nodes - 1));
  out.problem = assemble(profile, nodes);
  out.spectrum = eigen(out.problem, k, tol);
  return out;
}

}  // namespace unduloid
