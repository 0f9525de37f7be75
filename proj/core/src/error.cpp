#include "alexot/error.hpp"

namespace alexot {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DuplicateSites: return "DuplicateSites";
    case ErrorCode::FeasibilityFailed: return "FeasibilityFailed";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::Unbalanced: return "Unbalanced";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::InteriorPointOutside: return "InteriorPointOutside";
    case ErrorCode::DegenerateLift: return "DegenerateLift";
    case ErrorCode::BoundaryVertex: return "BoundaryVertex";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

}  // namespace alexot
