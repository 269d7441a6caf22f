#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace respcal {

// Values mirror the respcal_status codes of the C API.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kEmptySamples = 2,
  kMissingLabel = 3,
  kOracleUnavailable = 4,
  kMalformedResponse = 5,
  kIndexOutOfRange = 6,
  kInfeasibleRiskLevel = 7,
  kUnboundedBudget = 8,
  kInsufficientSamples = 9,
  kEmptyCollection = 10,
  kInvalidSpec = 11,
  kEnumerationTooLarge = 12,
  kParseError = 13,
  kDuplicateId = 14,
  kTooFewRecords = 15,
  kIoError = 16,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by load_dataset; carries the 1-based line number of the bad record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace respcal
