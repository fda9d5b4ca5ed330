#include "vosda/error.hpp"

namespace vosda {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "UsageError";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMagicMismatch: return "MagicMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kLayoutError: return "LayoutError";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kCropTooLarge: return "CropTooLarge";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kFingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kMissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kLabelAccess: return "LabelAccess";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIsolationViolation: return "IsolationViolation";
  }
  return "Error";
}

}  // namespace vosda
