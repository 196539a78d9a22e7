#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dopfit {

enum class ErrorCode {
  TooFewSamples,
  DuplicateAbscissa,
  NonMonotonicAbscissa,
  DegenerateWeights,
  DegenerateGrid,
  RankExhausted,
  DegreeOutOfRange,
  DimensionMismatch,
  NonPSDInput,
  SingularSystem,
  InvalidRange,
  InvalidArgument,
  ParseError,
  NegativeSigma,
  ZeroSigma,
  IoError,
};

/// Coarse classification used by the command line tool to pick an exit code.
enum class ErrorKind { Usage, Data, Numerical };

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DuplicateAbscissa: return "DuplicateAbscissa";
    case ErrorCode::NonMonotonicAbscissa: return "NonMonotonicAbscissa";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::RankExhausted: return "RankExhausted";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPSDInput: return "NonPSDInput";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NegativeSigma: return "NegativeSigma";
    case ErrorCode::ZeroSigma: return "ZeroSigma";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

constexpr ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegreeOutOfRange:
    case ErrorCode::InvalidArgument:
      return ErrorKind::Usage;
    case ErrorCode::DegenerateWeights:
    case ErrorCode::DegenerateGrid:
    case ErrorCode::RankExhausted:
    case ErrorCode::NonPSDInput:
    case ErrorCode::SingularSystem:
      return ErrorKind::Numerical;
    default:
      return ErrorKind::Data;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace dopfit
