#pragma once

#include <stdexcept>
#include <string>

namespace alexot {

enum class ErrorCode {
  InvalidInput,
  DuplicateSites,
  FeasibilityFailed,
  NonPositiveDensity,
  Unbalanced,
  InvalidBoundary,
  InteriorPointOutside,
  DegenerateLift,
  BoundaryVertex,
  SingularHessian,
  Infeasible,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; code() identifies the
// condition for callers that need to map it (the CLI maps them to exit codes).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace alexot
