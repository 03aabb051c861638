#include "unduloid/io.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace unduloid {

using nlohmann::json;

std::string format17(double x) { return fmt::format("{:.17g}", x); }

json shape_json(const UnduloidShape& shape) {
  return {{"n", shape.slab.n},   {"s", shape.s},           {"z1", shape.slab.z1}, {"z2", shape.slab.z2},
          {"L", shape.slab.width()}, {"H", shape.H},     {"c", shape.c},        {"r_neck", shape.r_neck},
          {"r_bulge", shape.r_bulge}};
}

json profile_sidecar_json(const ProfileCurve& profile) {
  json j = shape_json(profile.shape);
  j["schema_version"] = kSchemaVersion;
  j["m"] = profile.nodes.empty() ? 0 : profile.nodes.size() - 1;
  j["first_integral_residual_max"] = profile.residual_max;
  return j;
}

namespace {

double normalized(double v, const FamilyCurve& c) { return c.normalization > 0 ? v / c.normalization : v; }

}  // namespace

void write_curves_csv(std::ostream& os, const FamilyCurves& curves) {
  os << "s,H_prime,V_prime,H_prime_normalized,V_prime_normalized\n";
  for (std::size_t i = 0; i < curves.H_curve.samples.size(); ++i) {
    const double s = curves.H_curve.samples[i].s;
    const double h = curves.H_curve.samples[i].value;
    const double v = curves.V_curve.samples[i].value;
    os << format17(s) << ',' << format17(h) << ',' << format17(v) << ',' << format17(normalized(h, curves.H_curve))
       << ',' << format17(normalized(v, curves.V_curve)) << '\n';
  }
}

json curves_json(const FamilyCurves& curves) {
  json s = json::array(), h = json::array(), v = json::array(), hn = json::array(), vn = json::array();
  for (std::size_t i = 0; i < curves.H_curve.samples.size(); ++i) {
    s.push_back(curves.H_curve.samples[i].s);
    h.push_back(curves.H_curve.samples[i].value);
    v.push_back(curves.V_curve.samples[i].value);
    hn.push_back(normalized(curves.H_curve.samples[i].value, curves.H_curve));
    vn.push_back(normalized(curves.V_curve.samples[i].value, curves.V_curve));
  }
  return {{"schema_version", kSchemaVersion},
          {"n", curves.H_curve.n},
          {"s", s},
          {"H_prime", h},
          {"V_prime", v},
          {"H_prime_normalized", hn},
          {"V_prime_normalized", vn},
          {"H_prime_limit", curves.H_curve.normalization},
          {"H_prime_limit_converged", curves.H_curve.normalization_converged},
          {"V_prime_limit", curves.V_curve.normalization},
          {"V_prime_limit_converged", curves.V_curve.normalization_converged},
          {"H_prime_sign_changes", sign_changes(curves.H_curve)},
          {"V_prime_sign_changes", sign_changes(curves.V_curve)}};
}

json spectrum_json(int n, std::optional<double> s, const Spectrum& spectrum, bool with_eigenfunctions) {
  json j = {{"schema_version", kSchemaVersion},
            {"n", n},
            {"s", s ? json(*s) : json(nullptr)},
            {"lambda", spectrum.lambdas},
            {"error_estimates", spectrum.error_estimates}};
  if (with_eigenfunctions) {
    j["grid"] = spectrum.grid;
    j["eigenfunctions"] = spectrum.eigenfunctions;
  }
  return j;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json zeros_json(const std::vector<ZeroInfo>& zeros) {
  json a = json::array();
  for (const auto& z : zeros) a.push_back({{"s", z.s}, {"slope", to_string(z.slope)}, {"bracket", z.bracket}});
  return a;
}

std::string interval_text(const StabilityInterval& iv) {
  if (iv.lo == iv.hi) return fmt::format("{{{:.10f}}}", iv.lo);
  return fmt::format("{}{:.10f}, {:.10f}{}", iv.lo_closed ? '[' : '(', iv.lo, iv.hi, iv.hi_closed ? ']' : ')');
}

std::string point_name(const StabilityReport& r, double s) {
  const auto& c = r.critical_s;
  if (c.s0 && *c.s0 == s) return "s0";
  if (c.s1 && *c.s1 == s) return "s1";
  if (c.s2 && *c.s2 == s) return "s2";
  if (c.s3 && *c.s3 == s) return "s3";
  return fmt::format("{:.6f}", s);
}

bool is_breakpoint(const StabilityReport& r, double s) {
  auto hit = [s](const ZeroInfo& z) { return z.s == s; };
  return std::any_of(r.H_zeros.begin(), r.H_zeros.end(), hit) || std::any_of(r.V_zeros.begin(), r.V_zeros.end(), hit);
}

}  // namespace

json report_json(const StabilityReport& r) {
  json intervals = json::array();
  for (const auto& iv : r.intervals)
    intervals.push_back({{"lo", iv.lo},
                         {"hi", iv.hi},
                         {"lo_closed", iv.lo_closed},
                         {"hi_closed", iv.hi_closed},
                         {"text", interval_text(iv)},
                         {"verdict", iv.verdict ? json(to_string(*iv.verdict)) : json(nullptr)}});
  json traces = json::array();
  for (const auto& t : r.traces)
    traces.push_back({{"s", t.s},
                      {"H_prime", t.H_prime},
                      {"H_second", t.H_second},
                      {"V_prime", t.V_prime},
                      {"lambda2", t.lambda2},
                      {"lambda2_sign", to_string(t.lambda2_sign)},
                      {"H_prime_sign", to_string(t.H_prime_sign)},
                      {"V_prime_sign", to_string(t.V_prime_sign)},
                      {"sign_rule", to_string(t.sign_rule)},
                      {"applied_rule", to_string(t.applied_rule)},
                      {"verdict", to_string(t.verdict)}});
  json hyp = json::array();
  for (const auto& h : r.lambda2.hypotheses)
    hyp.push_back({{"s", h.s},
                   {"H_second", h.H_second},
                   {"H_second_error", h.H_second_error},
                   {"V_prime", h.V_prime},
                   {"V_prime_error", h.V_prime_error},
                   {"holds", h.holds}});
  json checks = json::array();
  for (const auto& c : r.lambda2.checks)
    checks.push_back({{"s", c.s},
                      {"asserted", to_string(c.asserted)},
                      {"lambda2", c.lambda2},
                      {"error_estimate", c.error},
                      {"computed", to_string(c.computed)},
                      {"shooting_lambda2", opt_json(c.prufer_lambda2)},
                      {"agrees", c.agrees},
                      {"note", c.note}});
  json pieces = json::array();
  for (std::size_t i = 0; i < r.lambda2.signs.size(); ++i)
    pieces.push_back({{"lo", i == 0 ? 0.0 : r.lambda2.breakpoints[i - 1]},
                      {"hi", i == r.lambda2.breakpoints.size() ? 1.0 : r.lambda2.breakpoints[i]},
                      {"sign", to_string(r.lambda2.signs[i])},
                      {"rule", to_string(r.lambda2.rules[i])}});
  json clusters = json::array();
  for (const auto& c : r.clusters)
    clusters.push_back({{"center", c.center},
                        {"window", {c.window_lo, c.window_hi}},
                        {"zeros", c.zeros},
                        {"split", c.split},
                        {"resolved", c.resolved},
                        {"precision", to_string(c.precision)},
                        {"note", c.note}});
  return {{"schema_version", kSchemaVersion},
          {"n", r.n},
          {"class", to_string(r.class_label)},
          {"critical_s",
           {{"s0", opt_json(r.critical_s.s0)},
            {"s1", opt_json(r.critical_s.s1)},
            {"s2", opt_json(r.critical_s.s2)},
            {"s3", opt_json(r.critical_s.s3)}}},
          {"H_prime_zeros", zeros_json(r.H_zeros)},
          {"V_prime_zeros", zeros_json(r.V_zeros)},
          {"lambda2_pieces", pieces},
          {"hypotheses", hyp},
          {"lambda2_checks", checks},
          {"intervals", intervals},
          {"traces", traces},
          {"clusters", clusters},
          {"stable_iff_V_prime_nonpositive", r.result_one_consistent},
          {"degraded", r.degraded},
          {"degraded_reasons", r.degraded_reasons},
          {"degraded_s", r.degraded_s}};
}

SignTable sign_table(const StabilityReport& r) {
  SignTable t;
  std::string prev = "0";
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    const auto& tr = r.traces[i];
    std::string label;
    if (is_breakpoint(r, tr.s)) {
      label = point_name(r, tr.s);
      prev = label;
    } else {
      const std::string next = i + 1 < r.traces.size() ? point_name(r, r.traces[i + 1].s) : "1";
      label = fmt::format("({},{})", prev, next);
    }
    t.columns.push_back(label);
    t.H_prime.push_back(to_string(tr.H_prime_sign));
    t.lambda2.push_back(to_string(tr.lambda2_sign));
    t.V_prime.push_back(to_string(tr.V_prime_sign));
    const auto v = r.verdict_at(tr.s);
    t.stability.push_back(v ? to_string(*v) : "?");
  }
  return t;
}

void write_sign_table(std::ostream& os, const StabilityReport& r) {
  const auto t = sign_table(r);
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t i = 0; i < width.size(); ++i)
    width[i] = std::max({t.columns[i].size(), t.stability[i].size(), std::size_t(1)});
  auto row = [&](const std::string& head, const std::vector<std::string>& cells) {
    os << fmt::format("{:<10}", head);
    for (std::size_t i = 0; i < cells.size(); ++i) os << " | " << fmt::format("{:^{}}", cells[i], width[i]);
    os << '\n';
  };
  os << fmt::format("Class {} (n = {}){}\n", to_string(r.class_label), r.n, r.degraded ? " [degraded]" : "");
  row("s", t.columns);
  row("H'(s)", t.H_prime);
  row("lambda2(s)", t.lambda2);
  row("V'(s)", t.V_prime);
  row("stability", t.stability);
}

void write_sk_table(std::ostream& os, const std::vector<StabilityReport>& reports) {
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.10f}", *v) : std::string("-"); };
  os << fmt::format("{:>3} {:>6} {:>14} {:>14} {:>14} {:>14} {:>12} {}\n", "n", "class", "s0", "s1", "s2", "s3",
                    "s3-s2", "note");
  for (const auto& r : reports) {
    const auto& c = r.critical_s;
    const std::string split = c.s2 && c.s3 ? fmt::format("{:.3e}", *c.s3 - *c.s2) : "-";
    std::string note;
    for (const auto& cl : r.clusters) note += cl.note;
    if (r.degraded) note += note.empty() ? "degraded" : "; degraded";
    os << fmt::format("{:>3} {:>6} {:>14} {:>14} {:>14} {:>14} {:>12} {}\n", r.n, to_string(r.class_label), cell(c.s0),
                      cell(c.s1), cell(c.s2), cell(c.s3), split, note);
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot open {} for writing", path.string()));
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::Io, fmt::format("failed writing {}", path.string()));
}

}  // namespace unduloid
