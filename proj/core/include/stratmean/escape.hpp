#pragma once

#include "stratmean/cones.hpp"
#include "stratmean/measure.hpp"

namespace stratmean {

struct EscapeResult {
  TangentVector vector;
  // Maximizing unit direction; the apex when the escape cone has no directions at all.
  TangentVector direction;
  double objective = 0.0;
  bool clippedToApex = false;
};

// Polar formula: direction maximizes pair(delta, theta) / sqrt(Lambda(theta)) over unit theta in the
// escape cone, radius is pair(delta, theta)^+ / (2 Lambda(theta)). Ties go to the lowest chart and
// then the smallest angle coordinate.
EscapeResult escapeVector(const MeanContext& ctx, const TangentMeasure& delta);

// (1 / (t r)) log of the mean of mu + t exp(delta r).
TangentVector perturbedLog(const MeanContext& ctx, const TangentMeasure& delta, double t, double r);

// perturbedLog with r = 1, or shrunk so every atom sits within 0.1 of the chart reach.
TangentVector escapeFdOracle(const MeanContext& ctx, const TangentMeasure& delta, double t);

enum class EscapeScheme { B, C };

TangentVector escapeApprox(const MeanContext& ctx, const TangentMeasure& delta, double t, EscapeScheme scheme);

// argmin over exponentiable X in `domain` of F(exp X) - F(mean) - t pair(delta, X). Not rescaled by t.
TangentVector minimizePerturbed(const MeanContext& ctx, const TangentMeasure& delta, double t, const ConeRepr& domain);

} // namespace stratmean
