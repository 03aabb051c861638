#pragma once

#include <span>
#include <vector>

#include "unduloid/shape.hpp"

namespace unduloid {

/// Neumann problem  -(sigma phi')' - q phi = lambda phi  on [z1, z2] for the
/// Jacobi operator  d/dz(sigma d/dz) + q  of a profile h0:
///   sigma = h0^n / (1 + h0_z^2)^{3/2},   q = n h0^{n-2} / sqrt(1 + h0_z^2).
/// Coefficients live on a uniform grid; sigma is also kept at the cell
/// midpoints so that the flux-form discretization is exact in its sampling.
struct SturmLiouvilleProblem {
  int n = 1;
  double z1 = 0.0;
  double z2 = 1.0;
  std::vector<double> grid;       // N uniform nodes
  std::vector<double> h;          // h0 at the nodes
  std::vector<double> sigma;      // at the nodes
  std::vector<double> sigma_mid;  // at the N-1 cell midpoints
  std::vector<double> q;          // at the nodes

  std::size_t size() const { return grid.size(); }
  double spacing() const { return (z2 - z1) / double(grid.size() - 1); }
  /// h0^n at the nodes (the volume weight of the first variation).
  std::vector<double> volume_weight() const;
};

inline constexpr int kDefaultGridNodes = 2049;

/// Resamples the profile to `nodes` uniform nodes (nodes - 1 divisible by 4).
/// Profiles sampled on a compatible grid (m a multiple of 2 (nodes - 1)) are
/// used directly; otherwise (h, h_z) are interpolated by quintic Hermite
/// polynomials using h_zz from the CMC equation.
SturmLiouvilleProblem assemble(const ProfileCurve& profile, int nodes = kDefaultGridNodes);

/// Problem with constant coefficients of the cylinder of radius r over [0, L].
SturmLiouvilleProblem assemble_cylinder(int n, double r, double L, int nodes = kDefaultGridNodes);

struct Spectrum {
  std::vector<double> lambdas;          // Richardson-extrapolated, ascending
  std::vector<double> error_estimates;  // per eigenvalue
  std::vector<double> grid_lambdas;     // eigenvalues of the discrete problem on the full grid
  std::vector<double> grid;
  std::vector<std::vector<double>> eigenfunctions;  // ∫ phi^2 dz = 1, positive near z1
};

/// The k lowest Neumann eigenpairs (3 <= k <= 5). Eigenvalues come from the
/// discrete problem on strides 4, 2, 1 of the grid, extrapolated twice;
/// throws GridTooCoarse if the estimate exceeds tol * max(1, |lambda|).
Spectrum eigen(const SturmLiouvilleProblem& problem, int k, double tol = 1e-8);

/// ([(i-1) pi r / L]^2 - n) r^{n-2}.
double cylinder_spectrum(int n, double r, double L, int i);

/// Discrete  L u = (sigma u')' + q u  in the lumped (trapezoidal) inner product.
std::vector<double> apply_operator(const SturmLiouvilleProblem& problem, std::span<const double> u);

/// Trapezoidal ∫ u v dz on the problem grid.
double inner_product(const SturmLiouvilleProblem& problem, std::span<const double> u,
                     std::span<const double> v);

/// Fourth-order one-sided derivatives of u at both ends.
std::pair<double, double> boundary_derivatives(const SturmLiouvilleProblem& problem,
                                               std::span<const double> u);

inline constexpr double kNeumannTolerance = 1e-6;

/// a_n ∫ (sigma u'^2 - q u^2) dz, which equals -a_n ∫ u L u dz for Neumann u.
/// Throws NonNeumannInput if the dropped boundary term |u sigma u'| at the
/// ends exceeds kNeumannTolerance times the size of the two integrals.
double second_variation(const SturmLiouvilleProblem& problem, std::span<const double> u, double a_n);

struct SecondVariationProbe {
  std::vector<double> u;
  double alpha = 0.0;  // coefficient of phi_1
  double A2 = 0.0;
  double volume_residual = 0.0;  // |∫ h0^n u dz|
};

/// u = alpha phi_1 + phi_2 with alpha = -(∫ h0^n phi_2) / (∫ h0^n phi_1).
SecondVariationProbe make_volume_preserving_probe(const SturmLiouvilleProblem& problem,
                                                  const Spectrum& spectrum, double a_n);

/// Independent shooting estimate of the i-th eigenvalue (1-based) from the
/// Pruefer angle, bracketed around `guess`.
double prufer_eigenvalue(const SturmLiouvilleProblem& problem, int i, double guess, double halfwidth);

/// Solves the unduloid of parameter s on a unit slab and returns its spectrum.
struct UnduloidSpectrum {
  UnduloidShape shape;
  SturmLiouvilleProblem problem;
  Spectrum spectrum;
};
UnduloidSpectrum unduloid_spectrum(int n, double s, int k = 3, int nodes = kDefaultGridNodes,
                                   double tol = 1e-8);

}  // namespace unduloid
