#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratmean/frechet.hpp"
#include "stratmean/measure.hpp"
#include "stratmean/tangent_cone.hpp"

namespace stratmean {

// Closed arc of link coordinates. On circles hi may exceed the link length, meaning the arc wraps.
struct Arc {
  double lo = 0.0;
  double hi = 0.0;
};

// Closed subcone of a tangent cone, always containing the apex.
//   Linear: the span of an orthonormal basis (n x q).
//   Book: the listed pages (each restricted to spine components in span(spineBasis)) plus the
//         spine subspace span(spineBasis).
//   Circle/Sector: the cone over a union of closed arcs.
class ConeRepr {
public:
  ConeRepr() = default;

  static ConeRepr apexOnly(const TangentCone& cone);
  static ConeRepr full(const TangentCone& cone);
  static ConeRepr subspace(const TangentCone& cone, const Eigen::MatrixXd& basis);
  static ConeRepr bookPart(const TangentCone& cone, std::vector<int> pages, const Eigen::MatrixXd& spineBasis);
  static ConeRepr arcs(const TangentCone& cone, std::vector<Arc> arcs);

  const TangentCone& cone() const noexcept { return cone_; }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const std::vector<int>& pages() const noexcept { return pages_; }
  const std::vector<Arc>& arcList() const noexcept { return arcs_; }

  bool isApexOnly() const;
  bool isFull() const;
  bool hasPage(int page) const;
  // Tolerance is absolute on unit directions (residual or link distance).
  bool contains(const TangentVector& v, double tol = 1e-9) const;
  ConeRepr intersect(const ConeRepr& other) const;
  // Uniform-ish random unit vector inside the subcone; throws Infeasible when apex-only.
  TangentVector sampleUnit(RngStream& rng) const;
  std::string describe() const;

private:
  TangentCone cone_;
  Eigen::MatrixXd basis_;
  std::vector<int> pages_;
  std::vector<Arc> arcs_;
};

// Orthonormal basis of the span of the columns (rank decided relative to the largest singular value).
Eigen::MatrixXd orthonormalSpan(const Eigen::MatrixXd& columns, double relTol = 1e-10);
Eigen::MatrixXd subspaceIntersection(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Everything the escape, collapse and harness layers need about a measure at its mean.
struct MeanContext {
  SpaceModel space;
  Measure measure;
  Point mean;
  TangentCone cone;
  TangentMeasure logged;
  double mass = 0.0;
  double secondMoment = 0.0;
  double escapeTol = 0.0;
  // Lambda(theta) = theta^T A theta on linear cones; A = mass/2 * I on flat spaces.
  Eigen::MatrixXd lambdaForm;
  ConeRepr escape;
  ConeRepr hull;
  ConeRepr fluctuating;
  FrechetReport report;
  FrechetOptions options;

  double lambda(const TangentVector& unit) const;
  double derivative(const TangentVector& unit) const;
};

MeanContext analyzeMean(const SpaceModel& space, const Measure& m, const FrechetOptions& opts = {});
MeanContext analyzeAt(const SpaceModel& space, const Measure& m, const Point& mean, const FrechetOptions& opts = {});

double directionalDerivative(const SpaceModel& space, const Measure& m, const Point& mean, const TangentVector& theta);
double lambdaCoeff(const SpaceModel& space, const Measure& m, const Point& mean, const TangentVector& theta);
// Richardson-extrapolated one-sided second difference of the Frechet function along exp(t theta).
double lambdaNumeric(const SpaceModel& space, const Measure& m, const Point& mean, const TangentVector& theta);

ConeRepr escapeCone(const TangentCone& cone, const TangentMeasure& logged, double tol);
ConeRepr hullCone(const TangentCone& cone, const TangentMeasure& logged);
ConeRepr escapeCone(const SpaceModel& space, const Measure& m, const Point& mean, double tol);
ConeRepr fluctuatingCone(const SpaceModel& space, const Measure& m, const Point& mean, double tol);

FrechetReport diagnoseMeasure(const SpaceModel& space, const Measure& m, const FrechetOptions& opts = {});

} // namespace stratmean
