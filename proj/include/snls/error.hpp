#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snls {

enum class ErrorCode {
  InvalidParams,
  NotAdmissible,
  OutOfRange,
  CriticalDelta,
  EmptyTrajectory,
  GridMismatch,
  MeshMismatch,
  LengthMismatch,
  UnboundedCoefficient,
  NotConservative,
  NonFinite,
  NoContraction,
  MaxItersExceeded,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::CriticalDelta: return "CriticalDelta";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnboundedCoefficient: return "UnboundedCoefficient";
    case ErrorCode::NotConservative: return "NotConservative";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Library-wide exception. The code is stable and machine-readable; the
/// message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace snls
