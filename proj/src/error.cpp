#include "tactile/error.hpp"

namespace tactile {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::MissingTrialFile: return "MissingTrialFile";
    case ErrorCode::MalformedTrialFile: return "MalformedTrialFile";
    case ErrorCode::MalformedModelFile: return "MalformedModelFile";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateInputs: return "DegenerateInputs";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NoContactDetected: return "NoContactDetected";
    case ErrorCode::InsufficientPreContact: return "InsufficientPreContact";
    case ErrorCode::InsufficientPostContact: return "InsufficientPostContact";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::NonPositiveVelocity: return "NonPositiveVelocity";
    case ErrorCode::DurationTooShort: return "DurationTooShort";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateData: return "DegenerateData";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Usage;
    case ErrorCode::ZeroVariance:
    case ErrorCode::KTooLarge:
    case ErrorCode::DegenerateData:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace tactile
