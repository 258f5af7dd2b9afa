#pragma once

#include <string>
#include <vector>

#include "stratmean/measure.hpp"
#include "stratmean/space.hpp"

namespace stratmean {

struct FrechetOptions {
  double meanTolerance = 1e-10;
  double sphereTolerance = 1e-9;
  // Relative escape-cone tolerance; multiplied by the root second moment of the logged measure.
  double escapeTolerance = 1e-8;
  int maxIterations = 200;
  int quadratureNodes = 512;
};

struct LocalizedFlags {
  bool uniqueMean = false;
  bool convex = false;
  bool logUnique = false;

  bool all() const { return uniqueMean && convex && logUnique; }
};

struct FrechetReport {
  Point mean;
  double value = 0.0;
  int iterations = 0;
  double gradientResidual = 0.0;
  LocalizedFlags localized;
  double convexityConstant = 0.0;
  double amenableProbe = 0.0;
  bool amenable = false;
  bool immured = false;
  bool nonUniqueMean = false;
  std::string solver;
  std::vector<std::string> notes;
};

double frechetValue(const SpaceModel& space, const Measure& m, const Point& p, int quadratureNodes = 512);

// Throws NonUniqueMean when the minimizer is not isolated.
FrechetReport frechetMean(const SpaceModel& space, const Measure& m, const FrechetOptions& opts = {});

// Inductive mean b_{k+1} = point at 1/(k+1) from b_k toward x_{k+1}. Atoms are visited in a
// deterministic weighted round-robin so each prefix tracks the weights as closely as possible.
Point inductiveMean(const SpaceModel& space, const Measure& m, long steps);

// Residual of the first-order optimality condition of the logged measure at its base point.
double optimalityResidual(const TangentCone& cone, const TangentMeasure& logged);

} // namespace stratmean
