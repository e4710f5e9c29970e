#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace teamrank {

enum class ErrorCode {
  kEmptyTeam,
  kDimensionMismatch,
  kInvalidWeights,
  kInvalidLambda,
  kNotAMember,
  kInsufficientData,
  kEmptyEliteSet,
  kInvalidArgument,
  kStaleIndex,
  kEmptySpace,
  kInvalidPartition,
  kMissingColumn,
  kMalformedRow,
  kEmptyFile,
  kInvalidParams,
  kDegenerateBinning,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as this exception type; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // what() without the code prefix, for adding context when rethrowing.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace teamrank
