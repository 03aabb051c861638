#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "unduloid/functionals.hpp"
#include "unduloid/io.hpp"
#include "unduloid/shape.hpp"
#include "unduloid/spectrum.hpp"
#include "unduloid/stability.hpp"

namespace unduloid::cli {

namespace {

struct RunConfig {
  std::string out = "./out/";
  std::string format;  // empty: per-command default
  std::string precision = "double";
  double quadrature_tol = 1e-12;
  double eigen_tol = 1e-8;
  double root_tol = 1e-10;
  int s_count = 199;
  double s_min = 5e-3;
  double s_max = 0.995;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DegenerateRadii:
      return kValidation;
    case ErrorCode::Io:
      return kIo;
    default:
      return kNumerical;
  }
}

void validate(const RunConfig& c) {
  if (!(c.quadrature_tol > 0 && c.eigen_tol > 0 && c.root_tol > 0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (c.s_count < 2) throw Error(ErrorCode::InvalidArgument, "s grid needs at least two points");
  if (!(c.s_min > 0 && c.s_min < c.s_max && c.s_max < 1))
    throw Error(ErrorCode::InvalidArgument, "s grid must satisfy 0 < min < max < 1");
  if (c.precision != "double" && c.precision != "extended")
    throw Error(ErrorCode::InvalidArgument, "precision must be double or extended");
  if (!c.format.empty() && c.format != "csv" && c.format != "json" && c.format != "text")
    throw Error(ErrorCode::InvalidArgument, "format must be csv, json or text");
}

std::string tag(double x) { return fmt::format("{}", x); }

std::filesystem::path out_path(const RunConfig& c, const std::string& name) {
  return std::filesystem::path(c.out) / name;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

int cmd_profile(const RunConfig& c, int n, double s, int m, double L, std::ostream& out) {
  const auto shape = solve_shape(SlabConfig{n, 0.0, L}, s);
  const auto profile = sample_profile(shape, m);
  const std::string stem = fmt::format("profile_n{}_s{}", n, tag(s));
  std::ostringstream csv;
  write_profile_csv(csv, profile);
  write_file(out_path(c, stem + ".csv"), csv.str());
  write_file(out_path(c, stem + ".json"), dump(profile_sidecar_json(profile)));
  out << fmt::format("n = {}  s = {}  H = {:.17g}  c = {:.17g}  r_neck = {:.17g}  r_bulge = {:.17g}\n", n, s,
                     shape.H, shape.c, shape.r_neck, shape.r_bulge);
  out << fmt::format("wrote {} ({} rows) and {}\n", out_path(c, stem + ".csv").string(), profile.nodes.size(),
                     out_path(c, stem + ".json").string());
  return kOk;
}

int cmd_curves(const RunConfig& c, int n, std::ostream& out) {
  std::vector<double> grid(static_cast<std::size_t>(c.s_count));
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = c.s_min + (c.s_max - c.s_min) * double(i) / double(grid.size() - 1);
  grid.back() = c.s_max;
  const auto curves = family_curves(n, grid);
  const std::string stem = fmt::format("curves_n{}", n);
  if (c.format == "json") {
    write_file(out_path(c, stem + ".json"), dump(curves_json(curves)));
  } else {
    std::ostringstream csv;
    write_curves_csv(csv, curves);
    write_file(out_path(c, stem + ".csv"), csv.str());
  }
  out << fmt::format("n = {}  H' sign changes {}  V' sign changes {}  lim|H'| = {:.6g}{}  lim|V'| = {:.6g}{}\n", n,
                     sign_changes(curves.H_curve), sign_changes(curves.V_curve), curves.H_curve.normalization,
                     curves.H_curve.normalization_converged ? "" : " (not converged)", curves.V_curve.normalization,
                     curves.V_curve.normalization_converged ? "" : " (not converged)");
  return kOk;
}

int cmd_classify(const RunConfig& c, const std::vector<int>& n_list, int scan_points, bool verify,
                 std::ostream& out) {
  StabilityOptions opt;
  opt.scan_points = scan_points;
  opt.quadrature_tol = c.quadrature_tol;
  opt.eigen_tol = c.eigen_tol;
  opt.root_tol = c.root_tol;
  opt.precision = c.precision == "extended" ? Precision::Extended : Precision::Double;
  opt.prufer = verify;
  std::vector<StabilityReport> reports;
  bool degraded = false;
  for (const int n : n_list) {
    auto r = classify(n, opt);
    write_file(out_path(c, fmt::format("report_n{}.json", n)), dump(report_json(r)));
    std::ostringstream table;
    write_sign_table(table, r);
    write_file(out_path(c, fmt::format("table_n{}.txt", n)), table.str());
    out << table.str();
    out << "stable on:";
    bool any = false;
    for (const auto& iv : r.intervals) {
      if (iv.verdict != Verdict::Stable) continue;
      any = true;
      out << ' ' << (iv.lo == iv.hi ? fmt::format("{{{:.10f}}}", iv.lo)
                                    : fmt::format("{}{:.10f}, {:.10f}{}", iv.lo_closed ? '[' : '(', iv.lo, iv.hi,
                                                  iv.hi_closed ? ']' : ')'));
    }
    out << (any ? "\n" : " none (unstable for all s)\n");
    for (const auto& reason : r.degraded_reasons) out << "degraded: " << reason << '\n';
    degraded = degraded || r.degraded;
    reports.push_back(std::move(r));
  }
  std::ostringstream sk;
  write_sk_table(sk, reports);
  write_file(out_path(c, "sk_table.txt"), sk.str());
  out << sk.str();
  return degraded ? kDegraded : kOk;
}

int cmd_spectrum(const RunConfig& c, int n, std::optional<double> s, bool cylinder, double r, double L, int k,
                 int nodes, bool verify, std::ostream& out) {
  SturmLiouvilleProblem problem;
  std::string stem;
  if (cylinder) {
    if (!(r > 0 && L > 0)) throw Error(ErrorCode::InvalidArgument, "cylinder needs -r > 0 and -L > 0");
    problem = assemble_cylinder(n, r, L, nodes);
    stem = fmt::format("spectrum_cylinder_n{}_r{}_L{}", n, tag(r), tag(L));
  } else {
    if (!s) throw Error(ErrorCode::InvalidArgument, "spectrum needs -s or --cylinder");
    const auto shape = solve_shape(SlabConfig{n, 0.0, L}, *s);
    problem = assemble(sample_profile(shape, 2 * (nodes - 1)), nodes);
    stem = fmt::format("spectrum_n{}_s{}", n, tag(*s));
  }
  // Fewer than three eigenpairs are computed as three and trimmed.
  auto sp = eigen(problem, std::max(k, 3), c.eigen_tol);
  std::vector<double> shooting;
  if (verify)
    for (std::size_t i = 0; i < sp.lambdas.size(); ++i)
      shooting.push_back(prufer_eigenvalue(problem, int(i) + 1, sp.lambdas[i],
                                           std::max(1e-6, 1e-3 * std::abs(sp.lambdas[i]))));
  const auto kk = static_cast<std::size_t>(k);
  sp.lambdas.resize(kk);
  sp.error_estimates.resize(kk);
  sp.grid_lambdas.resize(kk);
  sp.eigenfunctions.resize(kk);
  auto j = spectrum_json(n, cylinder ? std::nullopt : s, sp, true);
  if (cylinder) {
    j["r"] = r;
    j["L"] = L;
  }
  if (verify) {
    shooting.resize(kk);
    j["shooting_lambda"] = shooting;
  }
  write_file(out_path(c, stem + ".json"), dump(j));
  for (std::size_t i = 0; i < kk; ++i) {
    out << fmt::format("lambda_{} = {:.17g}  +- {:.2e}", i + 1, sp.lambdas[i], sp.error_estimates[i]);
    if (verify) out << fmt::format("  shooting {:.17g}", shooting[i]);
    out << '\n';
  }
  out << "wrote " << out_path(c, stem + ".json").string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Half-period unduloids between parallel hyperplanes: shapes, spectra and stability"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  RunConfig cfg;
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--format", cfg.format, "csv, json or text");
  app.add_option("--precision", cfg.precision, "double or extended (cluster refinement)")->capture_default_str();
  app.add_option("--quadrature-tol", cfg.quadrature_tol)->capture_default_str();
  app.add_option("--eigen-tol", cfg.eigen_tol)->capture_default_str();
  app.add_option("--root-tol", cfg.root_tol)->capture_default_str();
  app.add_option("--s-count", cfg.s_count, "points of the s grid for curves")->capture_default_str();
  app.add_option("--s-min", cfg.s_min)->capture_default_str();
  app.add_option("--s-max", cfg.s_max)->capture_default_str();

  int n = 1;
  double s = 0.5;
  int m = 512;
  double L = 1.0;
  auto* profile = app.add_subcommand("profile", "sample the profile curve h(z)");
  profile->add_option("-n", n, "dimension (hypersurface in R^{n+2})")->required();
  profile->add_option("-s", s, "non-uniformness 1 - r_neck / r_bulge")->required();
  profile->add_option("-m", m, "number of intervals")->capture_default_str();
  profile->add_option("-L", L, "slab width")->capture_default_str();

  auto* curves = app.add_subcommand("curves", "H'(s) and V'(s) with their s -> 1 normalization");
  curves->add_option("-n", n)->required();

  std::vector<int> n_list;
  int scan_points = 256;
  bool verify = false;
  auto* cls = app.add_subcommand("classify", "stability classification per dimension");
  cls->add_option("-n", n_list, "comma-separated dimensions")->required()->delimiter(',');
  cls->add_option("--scan-points", scan_points)->capture_default_str();
  cls->add_flag("--verify", verify, "shoot lambda_2 where the grid value is inconclusive");

  std::optional<double> s_spectrum;
  bool cylinder = false;
  double r = 1.0;
  int k = 3;
  int nodes = kDefaultGridNodes;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "lowest Neumann eigenpairs of the Jacobi operator");
  spectrum_cmd->add_option("-n", n)->required();
  spectrum_cmd->add_option("-s", s_spectrum);
  spectrum_cmd->add_flag("--cylinder", cylinder, "use the cylinder of radius r and length L");
  spectrum_cmd->add_option("-r", r)->capture_default_str();
  spectrum_cmd->add_option("-L", L)->capture_default_str();
  spectrum_cmd->add_option("-k", k, "number of eigenvalues (1..5)")->capture_default_str();
  spectrum_cmd->add_option("--nodes", nodes)->capture_default_str();
  spectrum_cmd->add_flag("--verify", verify, "cross-check with shooting");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    validate(cfg);
    if (*profile) return cmd_profile(cfg, n, s, m, L, out);
    if (*curves) return cmd_curves(cfg, n, out);
    if (*cls) return cmd_classify(cfg, n_list, scan_points, verify, out);
    if (*spectrum_cmd) {
      if (k < 1 || k > 5) throw Error(ErrorCode::InvalidArgument, "-k must lie in 1..5");
      return cmd_spectrum(cfg, n, s_spectrum, cylinder, r, L, k, nodes, verify, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kValidation;
}

}  // namespace unduloid::cli
