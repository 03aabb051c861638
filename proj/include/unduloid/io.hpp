#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unduloid/functionals.hpp"
#include "unduloid/shape.hpp"
#include "unduloid/spectrum.hpp"
#include "unduloid/stability.hpp"

namespace unduloid {

inline constexpr int kSchemaVersion = 1;

/// 17 significant digits, '.' decimal separator.
std::string format17(double x);

nlohmann::json shape_json(const UnduloidShape& shape);
nlohmann::json profile_sidecar_json(const ProfileCurve& profile);

/// Columns s,H_prime,V_prime,H_prime_normalized,V_prime_normalized.
void write_curves_csv(std::ostream& os, const FamilyCurves& curves);
nlohmann::json curves_json(const FamilyCurves& curves);

/// {schema_version, n, s, lambda, error_estimates[, grid, eigenfunctions]}; s is
/// null for a cylinder, which carries r and L instead.
nlohmann::json spectrum_json(int n, std::optional<double> s, const Spectrum& spectrum, bool with_eigenfunctions);

nlohmann::json report_json(const StabilityReport& report);

/// Sign rows for H', lambda_2, V' and the verdict row, one column per open
/// interval and per critical point.
struct SignTable {
  std::vector<std::string> columns;
  std::vector<std::string> H_prime;
  std::vector<std::string> lambda2;
  std::vector<std::string> V_prime;
  std::vector<std::string> stability;
};
SignTable sign_table(const StabilityReport& report);
void write_sign_table(std::ostream& os, const StabilityReport& report);

/// One row per dimension with s0..s3 (blank where absent) and the split s3 - s2.
void write_sk_table(std::ostream& os, const std::vector<StabilityReport>& reports);

/// Writes `content` to `path`, creating parent directories. Throws Io.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace unduloid
