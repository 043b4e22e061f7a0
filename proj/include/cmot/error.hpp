#pragma once

#include <stdexcept>
#include <string>

namespace cmot {

enum class ErrorKind {
  ZeroVector,
  DimensionMismatch,
  SingularInnovation,
  EmptyGallery,
  MissingDescriptor,
  ParseError,
  RowCountMismatch,
  IoError,
  EmptyGroundTruth,
  InvalidSpec,
  InvalidConfig,
  InvalidDetection,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularInnovation: return "SingularInnovation";
    case ErrorKind::EmptyGallery: return "EmptyGallery";
    case ErrorKind::MissingDescriptor: return "MissingDescriptor";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RowCountMismatch: return "RowCountMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidDetection: return "InvalidDetection";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` distinguishes failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

  /// I/O failures map to exit code 1, everything else is a validation error.
  bool is_io() const noexcept { return kind_ == ErrorKind::IoError; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace cmot
