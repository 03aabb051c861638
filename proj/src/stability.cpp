#include "unduloid/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

namespace unduloid {

std::string to_string(Sign s) {
  switch (s) {
    case Sign::Neg: return "-";
    case Sign::Zero: return "0";
    case Sign::Pos: return "+";
    case Sign::Indeterminate: return "?";
  }
  return "?";
}

std::string to_string(Rule r) {
  switch (r) {
    case Rule::CR0: return "CR0";
    case Rule::CR1: return "CR1";
    case Rule::CR21: return "CR21";
    case Rule::CR22: return "CR22";
    case Rule::CR23: return "CR23";
    case Rule::CR3: return "CR3";
    case Rule::CR4: return "CR4";
  }
  return "?";
}

std::string to_string(Verdict v) { return v == Verdict::Stable ? "stable" : "unstable"; }

std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::A: return "A";
    case StabilityClass::B: return "B";
    case StabilityClass::C: return "C";
    case StabilityClass::D: return "D";
    case StabilityClass::Unclassified: return "unclassified";
  }
  return "unclassified";
}

std::string to_string(Precision p) { return p == Precision::Double ? "double" : "extended"; }

Sign sign_of(double x) {
  if (std::isnan(x)) return Sign::Indeterminate;
  if (x > 0) return Sign::Pos;
  if (x < 0) return Sign::Neg;
  return Sign::Zero;
}

Sign operator*(Sign a, Sign b) {
  if (a == Sign::Indeterminate || b == Sign::Indeterminate) return Sign::Indeterminate;
  if (a == Sign::Zero || b == Sign::Zero) return Sign::Zero;
  return a == b ? Sign::Pos : Sign::Neg;
}

Sign flip(Sign s) {
  if (s == Sign::Pos) return Sign::Neg;
  if (s == Sign::Neg) return Sign::Pos;
  return s;
}

void StabilityOptions::validate() const {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  if (scan_points < 64) throw Error(ErrorCode::InvalidArgument, "scan_points must be >= 64");
  if (!(s_min > 0 && s_min < s_max && s_max < 1))
    throw Error(ErrorCode::InvalidArgument, "scan domain must satisfy 0 < s_min < s_max < 1");
  if (!(quadrature_tol > 0 && cluster_quadrature_tol > 0 && eigen_tol > 0 && root_tol > 0 &&
        cluster_root_tol > 0 && extended_quadrature_tol > 0 && extended_root_tol > 0 && cluster_distance > 0 &&
        cluster_window > 0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (cluster_scan_points < 10000) throw Error(ErrorCode::InvalidArgument, "cluster_scan_points must be >= 10000");
  if (eigen_nodes < 17 || (eigen_nodes - 1) % 4 != 0)
    throw Error(ErrorCode::InvalidArgument, "eigen_nodes must be >= 17 with (nodes - 1) divisible by 4");
}

double StabilityOptions::window_quadrature_tol() const {
  return precision == Precision::Extended ? extended_quadrature_tol : cluster_quadrature_tol;
}

double StabilityOptions::window_root_tol() const {
  return precision == Precision::Extended ? extended_root_tol : cluster_root_tol;
}

Sign lambda2_sign_near_zero(int n, double width) {
  const FixedSlabFamily<double> fam(n, width);
  const double H0 = fam.H_critical_cylinder();
  const double floor = 1e-10 * std::abs(H0);
  Sign result = Sign::Indeterminate;
  for (const double s : {5e-3, 1e-2}) {
    const double d = fam.H(s) - H0;
    if (std::abs(d) <= floor)
      throw Error(ErrorCode::Inconclusive,
                  fmt::format("H(s) - H(0) = {:.3e} at s = {} is below the noise floor", d, s));
    const Sign sg = d > 0 ? Sign::Neg : Sign::Pos;
    if (result != Sign::Indeterminate && sg != result)
      throw Error(ErrorCode::Inconclusive, "probes near s = 0 disagree on the sign of H(s) - H(0)");
    result = sg;
  }
  return result;
}

std::vector<ZeroInfo> zeros_from_samples(const Evaluator& f, const std::vector<double>& grid,
                                         const std::vector<double>& values, double root_tol) {
  if (grid.size() != values.size() || grid.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "zeros_from_samples: need matching grid and values");
  std::vector<ZeroInfo> zeros;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double fa = values[i], fb = values[i + 1];
    if (!std::isfinite(fa) || !std::isfinite(fb))
      throw Error(ErrorCode::NonFiniteSample, fmt::format("non-finite sample near s = {}", grid[i]));
    if (fa == 0.0) {
      const Sign before = i > 0 ? sign_of(values[i - 1]) : Sign::Indeterminate;
      zeros.push_back({grid[i], before == Sign::Neg ? Sign::Pos : sign_of(fb) == Sign::Neg ? Sign::Neg : Sign::Pos, 0.0});
      continue;
    }
    if (fb == 0.0 || (fa > 0) == (fb > 0)) continue;
    const double a = grid[i], b = grid[i + 1];
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        f, a, b, fa, fb, [root_tol](double x, double y) { return std::abs(y - x) <= root_tol; }, iters);
    if (iters >= 200) throw Error(ErrorCode::NonConvergence, fmt::format("root refinement stalled near s = {}", a));
    const double s = 0.5 * (bracket.first + bracket.second);
    // A simple zero keeps the bracket signs on either side of the refined root.
    for (int k = 1; k < 16; ++k) {
      const double x = a + (b - a) * double(k) / 16.0;
      if (std::abs(x - s) <= 2 * root_tol) continue;
      const double fx = f(x);
      if (fx == 0.0 || (fx > 0) != (x < s ? fa > 0 : fb > 0))
        throw Error(ErrorCode::ClusterUnresolved,
                    fmt::format("bracket [{:.12g}, {:.12g}] holds more than one sign change", a, b));
    }
    zeros.push_back({s, fa < 0 ? Sign::Pos : Sign::Neg, bracket.second - bracket.first});
  }
  return zeros;
}

std::vector<ZeroInfo> find_zeros(const Evaluator& f, double lo, double hi, int scan_points, double root_tol) {
  if (scan_points < 64) throw Error(ErrorCode::InvalidArgument, "find_zeros: scan_points must be >= 64");
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "find_zeros: need lo < hi");
  if (!(root_tol > 0)) throw Error(ErrorCode::InvalidArgument, "find_zeros: root_tol must be positive");
  std::vector<double> grid(static_cast<std::size_t>(scan_points));
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = i + 1 == grid.size() ? hi : lo + (hi - lo) * double(i) / double(scan_points - 1);
    values[i] = f(grid[i]);
  }
  auto zeros = zeros_from_samples(f, grid, values, root_tol);
  for (std::size_t i = 1; i < zeros.size(); ++i) {
    if (zeros[i].s - zeros[i - 1].s < 1e-4 && root_tol > 1e-12) {
      // Close pairs are refined further so that their order is unambiguous.
      return zeros_from_samples(f, grid, values, 1e-12);
    }
  }
  return zeros;
}

Sign Lambda2Profile::at(double s, double zero_tol) const {
  for (const double b : breakpoints)
    if (std::abs(s - b) <= zero_tol) return Sign::Zero;
  std::size_t piece = 0;
  while (piece < breakpoints.size() && s > breakpoints[piece]) ++piece;
  return signs[piece];
}

namespace {

Lambda2Check check_lambda2(int n, double s, Sign asserted, const StabilityOptions& opt) {
  Lambda2Check c;
  c.s = s;
  c.asserted = asserted;
  try {
    const auto shape = solve_shape(SlabConfig{n, 0.0, 1.0}, s);
    const auto problem = assemble(sample_profile(shape, 2 * (opt.eigen_nodes - 1)), opt.eigen_nodes);
    try {
      const auto sp = eigen(problem, 3, opt.eigen_tol);
      c.lambda2 = sp.lambdas[1];
      c.error = sp.error_estimates[1];
      c.computed = std::abs(c.lambda2) > c.error ? sign_of(c.lambda2) : Sign::Indeterminate;
      if (c.computed == Sign::Indeterminate) c.note = "|lambda_2| below its error estimate";
    } catch (const Error& e) {
      c.note = e.what();
    }
    if (opt.prufer && c.computed == Sign::Indeterminate) {
      const double guess = std::isnan(c.lambda2) ? 0.0 : c.lambda2;
      const double hw = std::max(1e-6, 10 * std::abs(guess));
      c.prufer_lambda2 = prufer_eigenvalue(problem, 2, guess, hw);
      c.computed = sign_of(*c.prufer_lambda2);
      c.note += "; sign from shooting";
    }
  } catch (const Error& e) {
    c.note = e.what();
  }
  c.agrees = c.computed == Sign::Indeterminate || asserted == Sign::Indeterminate || c.computed == asserted;
  return c;
}

template <class Real>
ZeroHypotheses hypotheses_at(int n, double s, double tol) {
  const FixedSlabFamily<Real> fam(n, Real(1), Real(tol));
  const auto h2 = d2_ds2_components<Real, 1>([&fam](Real x) { return std::array<Real, 1>{fam.H(x)}; }, Real(s),
                                             Real(1e-3), Real(0), Real(1), Real(tol) * Real(1e-3))[0];
  const auto d = family_derivatives(fam, Real(s));
  ZeroHypotheses hyp;
  hyp.s = s;
  hyp.H_second = double(h2.value);
  hyp.H_second_error = double(h2.error);
  hyp.V_prime = double(d.V.value);
  hyp.V_prime_error = double(d.V.error);
  hyp.holds = std::abs(hyp.H_second) > 10 * hyp.H_second_error && std::abs(hyp.V_prime) > 10 * hyp.V_prime_error;
  return hyp;
}

}  // namespace

Lambda2Profile lambda2_sign_profile(int n, const std::vector<ZeroInfo>& H_zeros, const StabilityOptions& opt) {
  Lambda2Profile p;
  p.signs.push_back(lambda2_sign_near_zero(n));
  p.rules.push_back(Rule::CR1);
  for (const auto& z : H_zeros) {
    const auto hyp = opt.precision == Precision::Extended
                         ? hypotheses_at<long double>(n, z.s, opt.window_quadrature_tol())
                         : hypotheses_at<double>(n, z.s, opt.quadrature_tol);
    p.hypotheses.push_back(hyp);
    p.breakpoints.push_back(z.s);
    if (hyp.holds && !p.hypothesis_failure) {
      p.signs.push_back(flip(p.signs.back()));
    } else {
      if (!p.hypothesis_failure) p.hypothesis_failure = z.s;
      p.signs.push_back(Sign::Indeterminate);
    }
    p.rules.push_back(Rule::CR22);
  }
  if (opt.cross_check) {
    for (std::size_t i = 0; i < p.signs.size(); ++i) {
      const double lo = i == 0 ? 0.0 : p.breakpoints[i - 1];
      const double hi = i == p.breakpoints.size() ? 1.0 : p.breakpoints[i];
      const double mid = std::clamp(0.5 * (lo + hi), kSMin, kSMax);
      p.checks.push_back(check_lambda2(n, mid, p.signs[i], opt));
    }
  }
  return p;
}

CriterionTrace verdict(double s, const SignTriple& signs) {
  CriterionTrace t;
  t.s = s;
  t.lambda2_sign = signs.lambda2;
  t.H_prime_sign = signs.H_prime;
  t.V_prime_sign = signs.V_prime;
  const bool v_nonzero = signs.V_prime == Sign::Pos || signs.V_prime == Sign::Neg;
  switch (signs.lambda2) {
    case Sign::Neg:
      t.applied_rule = Rule::CR0;
      t.verdict = Verdict::Unstable;
      return t;
    case Sign::Zero:
      if (signs.H_prime == Sign::Zero && v_nonzero) {
        t.applied_rule = Rule::CR3;
        t.verdict = Verdict::Unstable;
        return t;
      }
      break;
    case Sign::Pos: {
      const Sign prod = signs.H_prime * signs.V_prime;
      if (prod == Sign::Indeterminate) break;
      t.applied_rule = Rule::CR4;
      t.verdict = prod == Sign::Neg ? Verdict::Unstable : Verdict::Stable;
      return t;
    }
    case Sign::Indeterminate:
      break;
  }
  throw Error(ErrorCode::NoRuleApplies,
              fmt::format("no criterion applies at s = {} (lambda_2 {}, H' {}, V' {})", s, to_string(signs.lambda2),
                          to_string(signs.H_prime), to_string(signs.V_prime)));
}

bool StabilityInterval::contains(double s) const {
  if (s < lo || s > hi) return false;
  if (s == lo && !lo_closed) return false;
  if (s == hi && !hi_closed) return false;
  return true;
}

namespace {

Sign piecewise_sign(Sign initial, const std::vector<ZeroInfo>& zeros, double s, double zero_tol) {
  Sign sg = initial;
  for (const auto& z : zeros) {
    if (std::abs(s - z.s) <= zero_tol) return Sign::Zero;
    if (z.s < s) sg = flip(sg);
  }
  return sg;
}

}  // namespace

Sign StabilityReport::H_prime_sign(double s) const { return piecewise_sign(H_prime_initial, H_zeros, s, root_tol); }
Sign StabilityReport::V_prime_sign(double s) const { return piecewise_sign(V_prime_initial, V_zeros, s, root_tol); }

std::optional<Verdict> StabilityReport::verdict_at(double s) const {
  for (const auto& iv : intervals)
    if (iv.contains(s)) return iv.verdict;
  return std::nullopt;
}

bool StabilityReport::has_stable_interval() const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [](const StabilityInterval& iv) { return iv.verdict == Verdict::Stable; });
}

StabilityClass class_from_zeros(const std::vector<ZeroInfo>& H_zeros, const std::vector<ZeroInfo>& V_zeros,
                                CriticalValues* named) {
  CriticalValues cv;
  StabilityClass cls = StabilityClass::Unclassified;
  const std::size_t nh = H_zeros.size(), nv = V_zeros.size();
  if (nh == 0 && nv == 0) {
    cls = StabilityClass::A;
  } else if (nh == 2 && nv == 2) {
    cv = {H_zeros[0].s, V_zeros[0].s, V_zeros[1].s, H_zeros[1].s};
    if (*cv.s0 < *cv.s1 && *cv.s1 < *cv.s2 && *cv.s2 < *cv.s3) cls = StabilityClass::B;
  } else if (nh == 1 && nv == 2) {
    cv.s1 = V_zeros[0].s;
    cv.s2 = V_zeros[1].s;
    cv.s3 = H_zeros[0].s;
    if (*cv.s1 < *cv.s2 && *cv.s2 < *cv.s3) cls = StabilityClass::C;
  } else if (nh == 1 && nv == 1) {
    cv.s2 = V_zeros[0].s;
    cv.s3 = H_zeros[0].s;
    if (*cv.s2 < *cv.s3) cls = StabilityClass::D;
  }
  if (named) *named = cv;
  return cls;
}

namespace {

struct DerivativeSampler {
  virtual ~DerivativeSampler() = default;
  virtual std::pair<double, double> operator()(double s) const = 0;  // (H', V')
};

template <class Real>
struct FamilySampler final : DerivativeSampler {
  FixedSlabFamily<Real> fam;
  FamilySampler(int n, double tol) : fam(n, Real(1), Real(tol)) {}
  std::pair<double, double> operator()(double s) const override {
    const auto d = family_derivatives(fam, Real(s));
    return {double(d.H.value), double(d.V.value)};
  }
};

void mark_degraded(StabilityReport& r, std::string reason, std::optional<double> s = std::nullopt) {
  r.degraded = true;
  r.degraded_reasons.push_back(std::move(reason));
  if (s) r.degraded_s.push_back(*s);
}

// Rescans a window around each group of nearby zeros with a tighter family.
void resolve_clusters(StabilityReport& r, int n, const StabilityOptions& opt) {
  struct Tagged {
    double s;
    bool is_H;
  };
  std::vector<Tagged> all;
  for (const auto& z : r.H_zeros) all.push_back({z.s, true});
  for (const auto& z : r.V_zeros) all.push_back({z.s, false});
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.s < b.s; });

  std::vector<std::pair<double, double>> groups;  // [first, last] zero of each cluster
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (all[i + 1].s - all[i].s > opt.cluster_distance) continue;
    if (!groups.empty() && all[i].s <= groups.back().second)
      groups.back().second = all[i + 1].s;
    else
      groups.emplace_back(all[i].s, all[i + 1].s);
  }
  if (groups.empty()) return;

  std::unique_ptr<DerivativeSampler> tight;
  if (opt.precision == Precision::Extended)
    tight = std::make_unique<FamilySampler<long double>>(n, opt.window_quadrature_tol());
  else
    tight = std::make_unique<FamilySampler<double>>(n, opt.window_quadrature_tol());
  const auto& sampler = *tight;
  const Evaluator Hf = [&sampler](double s) { return sampler(s).first; };
  const Evaluator Vf = [&sampler](double s) { return sampler(s).second; };

  for (const auto& [first, last] : groups) {
    ClusterInfo info;
    info.precision = opt.precision;
    info.center = 0.5 * (first + last);
    const double half = 0.5 * std::max(opt.cluster_window, (last - first) * 2);
    info.window_lo = std::max(opt.s_min, info.center - half);
    info.window_hi = std::min(opt.s_max, info.center + half);
    const auto m = static_cast<std::size_t>(opt.cluster_scan_points);
    std::vector<double> grid(m), hv(m), vv(m);
    for (std::size_t i = 0; i < m; ++i) {
      grid[i] = i + 1 == m ? info.window_hi
                           : info.window_lo + (info.window_hi - info.window_lo) * double(i) / double(m - 1);
      std::tie(hv[i], vv[i]) = sampler(grid[i]);
    }
    auto inside = [&](const ZeroInfo& z) { return z.s >= info.window_lo && z.s <= info.window_hi; };
    const auto old_h = std::count_if(r.H_zeros.begin(), r.H_zeros.end(), inside);
    const auto old_v = std::count_if(r.V_zeros.begin(), r.V_zeros.end(), inside);
    std::vector<ZeroInfo> new_h, new_v;
    try {
      new_h = zeros_from_samples(Hf, grid, hv, opt.window_root_tol());
      new_v = zeros_from_samples(Vf, grid, vv, opt.window_root_tol());
    } catch (const Error& e) {
      info.note = e.what();
      mark_degraded(r, fmt::format("cluster near s = {:.10f} unresolved: {}", info.center, e.what()), info.center);
      r.clusters.push_back(std::move(info));
      continue;
    }
    std::erase_if(r.H_zeros, inside);
    std::erase_if(r.V_zeros, inside);
    r.H_zeros.insert(r.H_zeros.end(), new_h.begin(), new_h.end());
    r.V_zeros.insert(r.V_zeros.end(), new_v.begin(), new_v.end());
    for (const auto& z : new_h) info.zeros.push_back(z.s);
    for (const auto& z : new_v) info.zeros.push_back(z.s);
    std::sort(info.zeros.begin(), info.zeros.end());
    info.split = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < info.zeros.size(); ++i)
      info.split = std::min(info.split, info.zeros[i + 1] - info.zeros[i]);
    const bool same_count = std::ssize(new_h) == old_h && std::ssize(new_v) == old_v;
    info.resolved = same_count && info.zeros.size() >= 2 && info.split > 100 * opt.window_root_tol();
    if (info.resolved) {
      info.note = fmt::format("split {:.3e} resolved with {} scan points in {} precision", info.split, m,
                              to_string(opt.precision));
    } else {
      info.note = fmt::format("split not resolved in {} precision ({} H' and {} V' zeros in the window)",
                              to_string(opt.precision), new_h.size(), new_v.size());
      mark_degraded(r, fmt::format("cluster near s = {:.10f}: {}", info.center, info.note), info.center);
    }
    r.clusters.push_back(std::move(info));
  }
  auto by_s = [](const ZeroInfo& a, const ZeroInfo& b) { return a.s < b.s; };
  std::sort(r.H_zeros.begin(), r.H_zeros.end(), by_s);
  std::sort(r.V_zeros.begin(), r.V_zeros.end(), by_s);
}

double eigen_lambda2(int n, double s, const StabilityOptions& opt) {
  try {
    return unduloid_spectrum(n, std::clamp(s, kSMin, kSMax), 3, opt.eigen_nodes, opt.eigen_tol).spectrum.lambdas[1];
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

StabilityReport classify(int n, const StabilityOptions& opt) {
  opt.validate();
  if (n < 1 || n > opt.n_max)
    throw Error(ErrorCode::InvalidArgument, fmt::format("dimension n must lie in [1, {}]", opt.n_max));
  StabilityReport r;
  r.n = n;
  r.root_tol = opt.root_tol;

  const FixedSlabFamily<double> fam(n, 1.0, opt.quadrature_tol);
  const auto m = static_cast<std::size_t>(opt.scan_points);
  std::vector<double> grid(m), hv(m), vv(m);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = i + 1 == m ? opt.s_max : opt.s_min + (opt.s_max - opt.s_min) * double(i) / double(m - 1);
    const auto d = family_derivatives(fam, grid[i]);
    hv[i] = d.H.value;
    vv[i] = d.V.value;
  }
  r.H_prime_initial = sign_of(hv.front());
  r.V_prime_initial = sign_of(vv.front());
  const Evaluator Hf = [&fam](double s) { return family_derivatives(fam, s).H.value; };
  const Evaluator Vf = [&fam](double s) { return family_derivatives(fam, s).V.value; };
  r.H_zeros = zeros_from_samples(Hf, grid, hv, opt.root_tol);
  r.V_zeros = zeros_from_samples(Vf, grid, vv, opt.root_tol);
  resolve_clusters(r, n, opt);
  if (!r.clusters.empty()) r.root_tol = opt.window_root_tol();

  r.class_label = class_from_zeros(r.H_zeros, r.V_zeros, &r.critical_s);
  if (r.class_label == StabilityClass::Unclassified)
    mark_degraded(r, fmt::format("zero pattern ({} H', {} V') matches no class", r.H_zeros.size(), r.V_zeros.size()));

  r.lambda2 = lambda2_sign_profile(n, r.H_zeros, opt);
  if (r.lambda2.hypothesis_failure)
    mark_degraded(r, "H'' or V' vanishes at a zero of H'", *r.lambda2.hypothesis_failure);
  for (const auto& c : r.lambda2.checks)
    if (!c.agrees)
      mark_degraded(r, fmt::format("eigen-solver lambda_2 = {:.6e} disagrees with the asserted sign", c.lambda2), c.s);

  // Breakpoints split (0, 1) into open pieces and single points.
  std::vector<std::pair<double, bool>> breaks;  // (s, is H' zero)
  for (const auto& z : r.H_zeros) breaks.emplace_back(z.s, true);
  for (const auto& z : r.V_zeros) breaks.emplace_back(z.s, false);
  std::sort(breaks.begin(), breaks.end());

  struct Element {
    double lo, hi, at;
    bool point;
  };
  std::vector<Element> elements;
  double prev = 0.0;
  for (const auto& [b, is_h] : breaks) {
    elements.push_back({prev, b, 0.5 * (prev + b), false});
    elements.push_back({b, b, b, true});
    prev = b;
  }
  elements.push_back({prev, 1.0, 0.5 * (prev + 1.0), false});

  const double zero_tol = r.root_tol;
  r.result_one_consistent = true;
  for (const auto& e : elements) {
    const SignTriple signs{r.lambda2.at(e.at, e.point ? zero_tol : 0.0),
                           e.point ? r.H_prime_sign(e.at) : piecewise_sign(r.H_prime_initial, r.H_zeros, e.at, 0.0),
                           e.point ? r.V_prime_sign(e.at) : piecewise_sign(r.V_prime_initial, r.V_zeros, e.at, 0.0)};
    StabilityInterval iv{e.lo, e.hi, e.point, e.point, std::nullopt};
    CriterionTrace t;
    try {
      t = verdict(e.at, signs);
      iv.verdict = t.verdict;
    } catch (const Error& err) {
      t.s = e.at;
      t.lambda2_sign = signs.lambda2;
      t.H_prime_sign = signs.H_prime;
      t.V_prime_sign = signs.V_prime;
      mark_degraded(r, err.what(), e.at);
    }
    const double s_eval = std::clamp(e.at, kSMin, kSMax);
    const auto d = family_derivatives(fam, s_eval);
    t.H_prime = d.H.value;
    t.V_prime = d.V.value;
    for (const auto& h : r.lambda2.hypotheses)
      if (e.point && h.s == e.at) t.H_second = h.H_second;
    if (opt.cross_check) t.lambda2 = eigen_lambda2(n, e.at, opt);
    std::size_t piece = 0;
    while (piece < r.lambda2.breakpoints.size() && e.at > r.lambda2.breakpoints[piece]) ++piece;
    t.sign_rule = signs.lambda2 == Sign::Zero ? Rule::CR22 : piece == 0 ? Rule::CR1 : Rule::CR21;
    r.traces.push_back(t);

    const bool expect_stable = signs.V_prime == Sign::Neg || signs.V_prime == Sign::Zero;
    if (!iv.verdict || (*iv.verdict == Verdict::Stable) != expect_stable) r.result_one_consistent = false;

    if (!r.intervals.empty() && r.intervals.back().verdict == iv.verdict) {
      r.intervals.back().hi = iv.hi;
      r.intervals.back().hi_closed = iv.hi_closed;
    } else {
      r.intervals.push_back(iv);
    }
  }
  if (!r.result_one_consistent) mark_degraded(r, "verdicts differ from the rule stable <=> V' <= 0");
  return r;
}

}  // namespace unduloid
