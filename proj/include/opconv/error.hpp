#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opconv {

enum class ErrorKind {
  NonFinite,
  NotSymmetric,
  ConvergenceFailure,
  SpectrumOutOfDomain,
  DimensionMismatch,
  OutsideInterval,
  BadRange,
  NotConvexDetected,
  TooManyPoints,
  BelowNumericFloor,
  X0NotInSpectrum,
  TruncationTooShort,
  StrictlyConvexOnMesh,
  NotPSD,
  ParseError,
  VerificationFailed,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::SpectrumOutOfDomain: return "SpectrumOutOfDomain";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::OutsideInterval: return "OutsideInterval";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::NotConvexDetected: return "NotConvexDetected";
    case ErrorKind::TooManyPoints: return "TooManyPoints";
    case ErrorKind::BelowNumericFloor: return "BelowNumericFloor";
    case ErrorKind::X0NotInSpectrum: return "X0NotInSpectrum";
    case ErrorKind::TruncationTooShort: return "TruncationTooShort";
    case ErrorKind::StrictlyConvexOnMesh: return "StrictlyConvexOnMesh";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::VerificationFailed: return "VerificationFailed";
  }
  return "Unknown";
}

}  // namespace opconv
