#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lipvor {

enum class ErrorCode {
  InvalidArgument,
  DuplicatePoint,
  NoVertices,
  InternalGeometry,
  DimensionTooHigh,
  NonPositiveLipschitz,
  ViolationPresent,
  AllCovered,
  PointOutsideDomain,
  EvaluationFailure,
  DimensionMismatch,
  IndexOutOfRange,
  UnsupportedActivation,
  MalformedModel,
  MalformedCSV,
  ConstantColumn,
  NonNumeric,
  OutOfDomain,
  MalformedConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lipvor
