#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tactile {

enum class ErrorCode {
  // usage / configuration
  InvalidArgument,
  // data and I/O
  Io,
  MissingManifest,
  MissingTrialFile,
  MalformedTrialFile,
  MalformedModelFile,
  VersionMismatch,
  InvariantViolation,
  InsufficientPoints,
  DegenerateInputs,
  NonFiniteInput,
  NoContactDetected,
  InsufficientPreContact,
  InsufficientPostContact,
  LengthMismatch,
  DimensionMismatch,
  ClassTooSmall,
  SingleClassInput,
  InvalidProfile,
  NonPositiveVelocity,
  DurationTooShort,
  // numerical
  ZeroVariance,
  KTooLarge,
  DegenerateData,
};

/// Coarse grouping used by the CLI to choose an exit status.
enum class ErrorCategory { Usage, Data, Numerical };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace tactile
