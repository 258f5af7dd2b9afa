#include "stratmean/errors.hpp"

namespace stratmean {

const char* errorName(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::ChartMismatch: return "ChartMismatch";
  case ErrorCode::NonUniqueGeodesic: return "NonUniqueGeodesic";
  case ErrorCode::CutLocus: return "CutLocus";
  case ErrorCode::NotExponentiable: return "NotExponentiable";
  case ErrorCode::ApexVector: return "ApexVector";
  case ErrorCode::EmptyMeasure: return "EmptyMeasure";
  case ErrorCode::NonUniqueMean: return "NonUniqueMean";
  case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
  case ErrorCode::Infeasible: return "Infeasible";
  case ErrorCode::AxiomViolation: return "AxiomViolation";
  case ErrorCode::SolverFailure: return "SolverFailure";
  case ErrorCode::MismatchedSpaces: return "MismatchedSpaces";
  case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(errorName(code)) + ": " + message), code_(code) {}

AxiomError::AxiomError(int axiom, const std::string& message)
    : Error(ErrorCode::AxiomViolation, "axiom " + std::to_string(axiom) + ": " + message),
      axiom_(axiom) {}

} // namespace stratmean
