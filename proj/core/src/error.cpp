#include "teamrank/error.hpp"

namespace teamrank {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kEmptyTeam: return "EmptyTeam";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidWeights: return "InvalidWeights";
    case ErrorCode::kInvalidLambda: return "InvalidLambda";
    case ErrorCode::kNotAMember: return "NotAMember";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kEmptyEliteSet: return "EmptyEliteSet";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kStaleIndex: return "StaleIndex";
    case ErrorCode::kEmptySpace: return "EmptySpace";
    case ErrorCode::kInvalidPartition: return "InvalidPartition";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kDegenerateBinning: return "DegenerateBinning";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace teamrank
