#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unduloid {

/// Failure categories reported by the library. The CLI maps these onto
/// distinct exit codes.
enum class ErrorCode {
  OutOfDomain,
  InvalidArgument,
  DegenerateRadii,
  NonConvergence,
  NonFiniteSample,
  ResidualTooLarge,
  InconsistentShape,
  StepTooLarge,
  GridTooCoarse,
  NonNeumannInput,
  DegenerateProjection,
  Inconclusive,
  ClusterUnresolved,
  HypothesisFailure,
  NoRuleApplies,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateRadii: return "DegenerateRadii";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::InconsistentShape: return "InconsistentShape";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NonNeumannInput: return "NonNeumannInput";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::ClusterUnresolved: return "ClusterUnresolved";
    case ErrorCode::HypothesisFailure: return "HypothesisFailure";
    case ErrorCode::NoRuleApplies: return "NoRuleApplies";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace unduloid
