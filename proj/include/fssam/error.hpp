#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fssam {

enum class ErrorCode {
  ShapeMismatch,
  NonFinite,
  InvalidArgument,
  DegenerateMask,
  EmptyInput,
  MissingSupport,
  InvalidSpec,
  BadMagic,
  UnsupportedVersion,
  UnsupportedKind,
  TruncatedPayload,
  TrailingData,
  MaskRangeViolation,
  Io,
  Config,
};

inline std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingSupport: return "MissingSupport";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::MaskRangeViolation: return "MaskRangeViolation";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace fssam
