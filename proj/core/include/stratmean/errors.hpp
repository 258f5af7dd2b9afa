#pragma once

#include <stdexcept>
#include <string>

namespace stratmean {

enum class ErrorCode {
  InvalidArgument,
  ChartMismatch,
  NonUniqueGeodesic,
  CutLocus,
  NotExponentiable,
  ApexVector,
  EmptyMeasure,
  NonUniqueMean,
  NonPositiveLambda,
  Infeasible,
  AxiomViolation,
  SolverFailure,
  MismatchedSpaces,
  ConfigError,
};

const char* errorName(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

// Collapse axiom violations carry the index (1..5) of the first failing axiom.
class AxiomError : public Error {
public:
  AxiomError(int axiom, const std::string& message);
  int axiom() const noexcept { return axiom_; }

private:
  int axiom_;
};

} // namespace stratmean
