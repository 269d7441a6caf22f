#include "respcal/error.hpp"

namespace respcal {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptySamples: return "EmptySamples";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kOracleUnavailable: return "OracleUnavailable";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInfeasibleRiskLevel: return "InfeasibleRiskLevel";
    case ErrorCode::kUnboundedBudget: return "UnboundedBudget";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kEmptyCollection: return "EmptyCollection";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kTooFewRecords: return "TooFewRecords";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace respcal
