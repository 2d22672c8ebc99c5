#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rio {

enum class ErrorCode {
  InsufficientData,
  NotStatic,
  ExtrapolationTooFar,
  EmptyScan,
  AllPointsRejected,
  EmptyReference,
  NoCorrespondences,
  InvalidScenario,
  TrajectoryTooShort,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  MalformedRow,
  NonMonotonicTimestamp,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-checkable code; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotStatic: return "NotStatic";
    case ErrorCode::ExtrapolationTooFar: return "ExtrapolationTooFar";
    case ErrorCode::EmptyScan: return "EmptyScan";
    case ErrorCode::AllPointsRejected: return "AllPointsRejected";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::NoCorrespondences: return "NoCorrespondences";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::TrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace rio
