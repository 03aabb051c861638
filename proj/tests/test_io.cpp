#include <doctest.h>

#include <sstream>

#include "unduloid/io.hpp"

using namespace unduloid;

TEST_CASE("shortest round-trip formatting") {
  CHECK(format17(0.1) == "0.10000000000000001");
  CHECK(std::stod(format17(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("profile sidecar") {
  const auto p = sample_profile(solve_shape(SlabConfig{3, 0, 2}, 0.25), 64);
  const auto j = profile_sidecar_json(p);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["n"] == 3);
  CHECK(j["m"] == 64);
  CHECK(j["L"].get<double>() == 2.0);
  CHECK(j["H"].get<double>() == p.shape.H);
  CHECK(j["first_integral_residual_max"].get<double>() == p.residual_max);
}

TEST_CASE("curves csv and json agree") {
  FamilyCurves c;
  c.H_curve.n = c.V_curve.n = 5;
  c.H_curve.samples = {{0.25, 2.0}, {0.5, -1.0}};
  c.V_curve.samples = {{0.25, -4.0}, {0.5, 8.0}};
  c.H_curve.normalization = 2.0;
  c.V_curve.normalization = 4.0;
  std::ostringstream os;
  write_curves_csv(os, c);
  CHECK(os.str() == "s,H_prime,V_prime,H_prime_normalized,V_prime_normalized\n"
                    "0.25,2,-4,1,-1\n"
                    "0.5,-1,8,-0.5,2\n");
  const auto j = curves_json(c);
  CHECK(j["H_prime_normalized"][1].get<double>() == -0.5);
  CHECK(j["V_prime_sign_changes"] == 1);
}

TEST_CASE("sign table of a synthetic class D report") {
  StabilityReport r;
  r.n = 10;
  r.class_label = StabilityClass::D;
  r.H_zeros = {{0.82, Sign::Pos, 0}};
  r.V_zeros = {{0.81, Sign::Pos, 0}};
  r.critical_s.s2 = 0.81;
  r.critical_s.s3 = 0.82;
  auto tr = [](double s, Sign h, Sign l, Sign v) {
    CriterionTrace t;
    t.s = s;
    t.H_prime_sign = h;
    t.lambda2_sign = l;
    t.V_prime_sign = v;
    return t;
  };
  r.traces = {tr(0.4, Sign::Neg, Sign::Pos, Sign::Neg), tr(0.81, Sign::Neg, Sign::Pos, Sign::Zero),
              tr(0.815, Sign::Neg, Sign::Pos, Sign::Pos), tr(0.82, Sign::Zero, Sign::Zero, Sign::Pos),
              tr(0.9, Sign::Pos, Sign::Neg, Sign::Pos)};
  r.intervals = {{0.0, 0.81, false, true, Verdict::Stable}, {0.81, 1.0, false, false, Verdict::Unstable}};
  const auto t = sign_table(r);
  CHECK(t.columns == std::vector<std::string>{"(0,s2)", "s2", "(s2,s3)", "s3", "(s3,1)"});
  CHECK(t.H_prime == std::vector<std::string>{"-", "-", "-", "0", "+"});
  CHECK(t.stability == std::vector<std::string>{"stable", "stable", "unstable", "unstable", "unstable"});

  const auto j = report_json(r);
  CHECK(j["class"] == "D");
  CHECK(j["critical_s"]["s0"].is_null());
  CHECK(j["intervals"][0]["text"] == "(0.0000000000, 0.8100000000]");

  std::ostringstream sk;
  write_sk_table(sk, {r});
  CHECK(sk.str().find("1.000e-02") != std::string::npos);
}

TEST_CASE("unwritable path") {
  try {
    write_file("/proc/does/not/exist/x.txt", "x");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}
