#pragma once

#include <stdexcept>
#include <string>

namespace factorfuse {

enum class ErrorCode {
  // configuration
  InvalidStrategy,
  IncompatiblePanel,
  InvalidArgument,
  // data
  EmptyCluster,
  DegenerateData,
  InvalidData,
  NoEvents,
  DegeneratePoints,
  // numerical
  SingularCovariance,
  NonConvergence,
  MonotoneLikelihood,
  NotNested,
  NumericalInconsistency,
};

enum class ErrorClass { Config, Data, Numerical };

constexpr ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidStrategy:
    case ErrorCode::IncompatiblePanel:
    case ErrorCode::InvalidArgument:
      return ErrorClass::Config;
    case ErrorCode::EmptyCluster:
    case ErrorCode::DegenerateData:
    case ErrorCode::InvalidData:
    case ErrorCode::NoEvents:
    case ErrorCode::DegeneratePoints:
      return ErrorClass::Data;
    default:
      return ErrorClass::Numerical;
  }
}

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass category() const noexcept { return error_class(code_); }

 private:
  ErrorCode code_;
};

}  // namespace factorfuse
