#pragma once

#include <stdexcept>
#include <string>

namespace cuboidfit {

enum class ErrorCode {
  EntirelyBehindCamera,
  SensorInsideFootprint,
  ProjectionDegenerate,
  OutOfRange,
  EmptyBatch,
  NoTarget,
  NonFiniteObjective,
  NonFiniteCost,
  ParseError,
  SchemaVersionMismatch,
  UnknownCamera,
  UnknownFrame,
  InvalidArgument,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EntirelyBehindCamera: return "EntirelyBehindCamera";
    case ErrorCode::SensorInsideFootprint: return "SensorInsideFootprint";
    case ErrorCode::ProjectionDegenerate: return "ProjectionDegenerate";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NoTarget: return "NoTarget";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::NonFiniteCost: return "NonFiniteCost";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::UnknownCamera: return "UnknownCamera";
    case ErrorCode::UnknownFrame: return "UnknownFrame";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library exception. Every failure path in cuboidfit throws this with a code
/// that callers can switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cuboidfit
