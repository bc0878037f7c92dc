#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssvrg {

enum class ErrorCode {
  RankDeficient,
  NotSPD,
  NonFiniteValue,
  SingularStep,
  NotFeasible,
  NotTangent,
  InvalidArgument,
  TooManySamples,
  NoFeasibleC,
  DegenerateSchedule,
  TooLarge,
  NoConvergentTau,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the bench harness in particular) can record why a run stopped.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::SingularStep: return "SingularStep";
    case ErrorCode::NotFeasible: return "NotFeasible";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooManySamples: return "TooManySamples";
    case ErrorCode::NoFeasibleC: return "NoFeasibleC";
    case ErrorCode::DegenerateSchedule: return "DegenerateSchedule";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NoConvergentTau: return "NoConvergentTau";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ssvrg
