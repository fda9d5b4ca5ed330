#pragma once

#include <stdexcept>
#include <string>

namespace vosda {

enum class ErrorCode {
  kUsage = 1,
  kIoFailure,
  kMagicMismatch,
  kTruncatedFile,
  kSpecInvalid,
  kLayoutError,
  kCountMismatch,
  kShapeError,
  kCropTooLarge,
  kNonFiniteGradient,
  kNonFiniteValue,
  kFingerprintMismatch,
  kCorruptCheckpoint,
  kMissingCheckpoint,
  kMissingGroundTruth,
  kLabelAccess,
  kConfigError,
  kEmptyInput,
  kIsolationViolation,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The text without the code-name prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace vosda
