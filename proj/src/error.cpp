#include "lipvor/error.hpp"

namespace lipvor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::NoVertices: return "NoVertices";
    case ErrorCode::InternalGeometry: return "InternalGeometry";
    case ErrorCode::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorCode::NonPositiveLipschitz: return "NonPositiveLipschitz";
    case ErrorCode::ViolationPresent: return "ViolationPresent";
    case ErrorCode::AllCovered: return "AllCovered";
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnsupportedActivation: return "UnsupportedActivation";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::MalformedCSV: return "MalformedCSV";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace lipvor
