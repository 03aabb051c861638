#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "unduloid/functionals.hpp"
#include "unduloid/spectrum.hpp"

namespace unduloid {

enum class Sign { Neg, Zero, Pos, Indeterminate };
enum class Rule { CR0, CR1, CR21, CR22, CR23, CR3, CR4 };
enum class Verdict { Stable, Unstable };
enum class StabilityClass { A, B, C, D, Unclassified };
enum class Precision { Double, Extended };

std::string to_string(Sign s);
std::string to_string(Rule r);
std::string to_string(Verdict v);
std::string to_string(StabilityClass c);
std::string to_string(Precision p);

Sign sign_of(double x);
Sign operator*(Sign a, Sign b);
Sign flip(Sign s);

struct StabilityOptions {
  int n_max = 16;
  int scan_points = 256;
  double s_min = kSMin;
  double s_max = kSMax;
  double quadrature_tol = 1e-12;
  double cluster_quadrature_tol = 1e-14;
  double eigen_tol = 1e-8;
  double root_tol = 1e-10;
  double cluster_root_tol = 1e-12;
  double extended_quadrature_tol = 1e-17;  // replace the two cluster tolerances
  double extended_root_tol = 1e-15;        // when precision is Extended
  double cluster_distance = 1e-4;
  double cluster_window = 1e-3;
  int cluster_scan_points = 10001;
  int eigen_nodes = kDefaultGridNodes;
  bool cross_check = true;  // eigen-solver lambda_2 at interval midpoints
  bool prufer = false;      // also shoot lambda_2 where the grid value is indeterminate
  Precision precision = Precision::Double;
  void validate() const;
  double window_quadrature_tol() const;
  double window_root_tol() const;
};

/// Near s = 0, compares H(s) with the critical-cylinder value at both probes:
/// H(s) > H(0) gives lambda_2 < 0, H(s) < H(0) gives lambda_2 > 0.
/// Throws Inconclusive if the probes disagree or sit within the noise floor.
Sign lambda2_sign_near_zero(int n, double width = 1.0);

struct ZeroInfo {
  double s = 0.0;
  Sign slope = Sign::Indeterminate;  // sign of f' at the zero
  double bracket = 0.0;              // final bracket width
};

using Evaluator = std::function<double(double)>;

/// Zeros of f on [lo, hi] from a uniform scan of `scan_points` samples,
/// each refined by TOMS 748 to a bracket of `root_tol`.
std::vector<ZeroInfo> find_zeros(const Evaluator& f, double lo, double hi, int scan_points,
                                 double root_tol = 1e-10);

/// Same, for samples already taken on `grid`.
std::vector<ZeroInfo> zeros_from_samples(const Evaluator& f, const std::vector<double>& grid,
                                         const std::vector<double>& values, double root_tol);

/// H'' and V' at a zero of H'; the flip of lambda_2 there needs both nonzero.
struct ZeroHypotheses {
  double s = 0.0;
  double H_second = 0.0;
  double H_second_error = 0.0;
  double V_prime = 0.0;
  double V_prime_error = 0.0;
  bool holds = false;
};

/// Eigen-solver check of the asserted lambda_2 sign at one s.
struct Lambda2Check {
  double s = 0.0;
  Sign asserted = Sign::Indeterminate;
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double error = std::numeric_limits<double>::quiet_NaN();
  Sign computed = Sign::Indeterminate;
  std::optional<double> prufer_lambda2;
  bool agrees = true;
  std::string note;
};

/// Piecewise-constant sign of lambda_2 on (0, 1): piece i lies between
/// breakpoints[i-1] and breakpoints[i] (the H' zeros), with lambda_2 = 0 at
/// each breakpoint.
struct Lambda2Profile {
  std::vector<double> breakpoints;
  std::vector<Sign> signs;
  std::vector<Rule> rules;  // CR1 for the first piece, CR22 after a flip
  std::vector<ZeroHypotheses> hypotheses;
  std::vector<Lambda2Check> checks;
  std::optional<double> hypothesis_failure;  // s of the first failed zero

  Sign at(double s, double zero_tol) const;
};

Lambda2Profile lambda2_sign_profile(int n, const std::vector<ZeroInfo>& H_zeros,
                                    const StabilityOptions& options = {});

struct CriterionTrace {
  double s = 0.0;
  double H_prime = std::numeric_limits<double>::quiet_NaN();
  double H_second = std::numeric_limits<double>::quiet_NaN();
  double V_prime = std::numeric_limits<double>::quiet_NaN();
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  Sign lambda2_sign = Sign::Indeterminate;
  Sign H_prime_sign = Sign::Indeterminate;
  Sign V_prime_sign = Sign::Indeterminate;
  Rule sign_rule = Rule::CR1;  // how the lambda_2 sign was obtained
  Rule applied_rule = Rule::CR0;
  Verdict verdict = Verdict::Unstable;
};

struct SignTriple {
  Sign lambda2;
  Sign H_prime;
  Sign V_prime;
};

/// Applies the first matching rule of CR0, CR3, CR4. Throws NoRuleApplies otherwise.
CriterionTrace verdict(double s, const SignTriple& signs);

struct StabilityInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool lo_closed = false;
  bool hi_closed = false;
  std::optional<Verdict> verdict;  // empty where no rule applies

  bool contains(double s) const;
};

struct ClusterInfo {
  double center = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> zeros;  // all zeros of H' and V' found in the window
  double split = 0.0;         // smallest distance between them
  bool resolved = false;
  Precision precision = Precision::Double;
  std::string note;
};

struct CriticalValues {
  std::optional<double> s0, s1, s2, s3;
};

struct StabilityReport {
  int n = 0;
  StabilityClass class_label = StabilityClass::Unclassified;
  CriticalValues critical_s;
  std::vector<ZeroInfo> H_zeros;
  std::vector<ZeroInfo> V_zeros;
  Sign H_prime_initial = Sign::Indeterminate;  // sign of H' just right of s_min
  Sign V_prime_initial = Sign::Indeterminate;
  Lambda2Profile lambda2;
  std::vector<StabilityInterval> intervals;
  std::vector<CriterionTrace> traces;
  std::vector<ClusterInfo> clusters;
  bool result_one_consistent = false;  // stable exactly where V' <= 0
  bool degraded = false;
  std::vector<std::string> degraded_reasons;
  std::vector<double> degraded_s;
  double root_tol = 1e-10;

  Sign H_prime_sign(double s) const;
  Sign V_prime_sign(double s) const;
  /// Verdict of the interval containing s.
  std::optional<Verdict> verdict_at(double s) const;
  /// True when every stable interval is reported, i.e. not unstable for all s.
  bool has_stable_interval() const;
};

/// The full pipeline for one dimension: curves, zeros, lambda_2 profile,
/// verdicts and class label.
StabilityReport classify(int n, const StabilityOptions& options = {});

/// Class expected from the zero pattern (#H' zeros, #V' zeros, ordering).
StabilityClass class_from_zeros(const std::vector<ZeroInfo>& H_zeros, const std::vector<ZeroInfo>& V_zeros,
                                CriticalValues* named = nullptr);

}  // namespace unduloid
