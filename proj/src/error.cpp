#include "qcap/error.hpp"

namespace qcap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadFactorization: return "BadFactorization";
    case ErrorCode::NotTracePreserving: return "NotTracePreserving";
    case ErrorCode::NotCompletelyPositive: return "NotCompletelyPositive";
    case ErrorCode::NotDensityMatrix: return "NotDensityMatrix";
    case ErrorCode::InvalidPovm: return "InvalidPovm";
    case ErrorCode::ElementsExceedIdentity: return "ElementsExceedIdentity";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::SingularArgument: return "SingularArgument";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::NotBlockCode: return "NotBlockCode";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::SingularElement: return "SingularElement";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace qcap
