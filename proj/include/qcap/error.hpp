#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcap {

enum class ErrorCode {
  NotHermitian,
  SingularMatrix,
  DimensionOverflow,
  DimensionMismatch,
  BadFactorization,
  NotTracePreserving,
  NotCompletelyPositive,
  NotDensityMatrix,
  InvalidPovm,
  ElementsExceedIdentity,
  BadParameter,
  InternalInconsistency,
  SingularArgument,
  NotConverged,
  EnumerationTooLarge,
  NotBlockCode,
  ParameterOutOfRange,
  SingularElement,
  ConfigError,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qcap
