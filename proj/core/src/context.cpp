#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stratmean/cones.hpp"
#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

Eigen::MatrixXd sphereLambdaForm(const TangentMeasure& logged) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  for (const auto& atom : logged.atoms()) {
    if (atom.vector.isApex) {
      a += atom.weight * Eigen::Matrix2d::Identity();
      continue;
    }
    const Eigen::Vector2d u(atom.vector.direction[0], atom.vector.direction[1]);
    const double d = atom.vector.radius;
    const Eigen::Matrix2d proj = u * u.transpose();
    a += atom.weight * (proj + d / std::tan(d) * (Eigen::Matrix2d::Identity() - proj));
  }
  return 0.5 * a;
}

} // namespace

double MeanContext::lambda(const TangentVector& unit) const {
  if (unit.isApex) throw Error(ErrorCode::ApexVector, "Lambda needs a direction");
  if (space.kind() == SpaceKind::SphereCap) {
    const Eigen::VectorXd t = unit.direction;
    const double v = t.dot(lambdaForm * t);
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "second-order coefficient is not positive");
    return v;
  }
  return 0.5 * mass;
}

double MeanContext::derivative(const TangentVector& unit) const { return -pair(cone, logged, cone.unit(unit)); }

MeanContext analyzeAt(const SpaceModel& space, const Measure& m, const Point& mean, const FrechetOptions& opts) {
  MeanContext ctx;
  ctx.space = space;
  ctx.measure = m;
  ctx.mean = mean;
  ctx.options = opts;
  ctx.cone = tangentCone(space, mean);
  ctx.logged = pushforwardLog(space, mean, m, {}, opts.quadratureNodes);
  for (const auto& a : ctx.logged.atoms()) {
    ctx.mass += a.weight;
    ctx.secondMoment += a.weight * a.vector.radius * a.vector.radius;
  }
  ctx.escapeTol = opts.escapeTolerance * std::max(std::sqrt(ctx.secondMoment), std::numeric_limits<double>::min());
  if (space.kind() == SpaceKind::SphereCap) {
    ctx.lambdaForm = sphereLambdaForm(ctx.logged);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ctx.lambdaForm);
    if (!(eig.eigenvalues()[0] > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "second-order form is not positive definite");
  } else {
    const int n = ctx.cone.isLinear() ? ctx.cone.ambientDim() : 1;
    ctx.lambdaForm = 0.5 * ctx.mass * Eigen::MatrixXd::Identity(n, n);
  }
  ctx.escape = escapeCone(ctx.cone, ctx.logged, ctx.escapeTol);
  ctx.hull = hullCone(ctx.cone, ctx.logged);
  ctx.fluctuating = ctx.escape.intersect(ctx.hull);
  ctx.report.mean = mean;
  return ctx;
}

MeanContext analyzeMean(const SpaceModel& space, const Measure& m, const FrechetOptions& opts) {
  FrechetReport report = frechetMean(space, m, opts);
  MeanContext ctx = analyzeAt(space, m, report.mean, opts);
  ctx.report = std::move(report);
  return ctx;
}

double directionalDerivative(const SpaceModel& space, const Measure& m, const Point& mean, const TangentVector& theta) {
  const TangentCone cone = tangentCone(space, mean);
  return -pair(cone, pushforwardLog(space, mean, m), cone.unit(theta));
}

double lambdaCoeff(const SpaceModel& space, const Measure& m, const Point& mean, const TangentVector& theta) {
  const TangentCone cone = tangentCone(space, mean);
  const TangentVector unit = cone.unit(theta);
  if (space.isFlat()) return 0.5 * m.totalMass();
  const TangentMeasure logged = pushforwardLog(space, mean, m);
  const Eigen::MatrixXd a = sphereLambdaForm(logged);
  const double v = unit.direction.dot(a * unit.direction);
  if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "second-order coefficient is not positive");
  return v;
}

double lambdaNumeric(const SpaceModel& space, const Measure& m, const Point& mean, const TangentVector& theta) {
  const TangentCone cone = tangentCone(space, mean);
  const TangentVector unit = cone.unit(theta);
  const double f0 = frechetValue(space, m, mean);
  const double slope = directionalDerivative(space, m, mean, unit);
  auto quotient = [&](double t) {
    const double ft = frechetValue(space, m, expMap(space, mean, cone.scaled(unit, t)));
    return (ft - f0 - t * slope) / (t * t);
  };
  const double h = 1e-3;
  const double d1 = quotient(h), d2 = quotient(0.5 * h), d3 = quotient(0.25 * h);
  // Remove the O(t) and O(t^2) terms.
  const double r1 = 2.0 * d2 - d1, r2 = 2.0 * d3 - d2;
  return (4.0 * r2 - r1) / 3.0;
}

ConeRepr escapeCone(const SpaceModel& space, const Measure& m, const Point& mean, double tol) {
  return escapeCone(tangentCone(space, mean), pushforwardLog(space, mean, m), tol);
}

ConeRepr fluctuatingCone(const SpaceModel& space, const Measure& m, const Point& mean, double tol) {
  const TangentCone cone = tangentCone(space, mean);
  const TangentMeasure logged = pushforwardLog(space, mean, m);
  return escapeCone(cone, logged, tol).intersect(hullCone(cone, logged));
}

FrechetReport diagnoseMeasure(const SpaceModel& space, const Measure& m, const FrechetOptions& opts) {
  FrechetReport report;
  try {
    report = frechetMean(space, m, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonUniqueMean && e.code() != ErrorCode::SolverFailure) throw;
    report.nonUniqueMean = e.code() == ErrorCode::NonUniqueMean;
    report.notes.push_back(e.what());
    report.immured = space.isCat0();
    return report;
  }
  report.localized.uniqueMean = true;
  const Point& mean = report.mean;

  TangentMeasure logged;
  try {
    logged = pushforwardLog(space, mean, m, {}, opts.quadratureNodes);
    report.localized.logUnique = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CutLocus) throw;
    report.notes.push_back("support meets the cut locus of the mean");
  }

  const TangentCone cone = tangentCone(space, mean);
  double rms = 0.0, mass = 0.0, maxRadius = 0.0;
  for (const auto& a : logged.atoms()) {
    rms += a.weight * a.vector.radius * a.vector.radius;
    mass += a.weight;
    maxRadius = std::max(maxRadius, a.vector.radius);
  }
  rms = mass > 0.0 ? std::sqrt(rms / mass) : 0.0;

  // Uniform convexity probe: fitted C in F(x) - F(mean) >= C d(x, mean)^2 on a small ball.
  const double ball = std::min(0.1 * std::max(rms, 1e-6), 0.25 * std::min(expReach(space, mean), 1e6));
  RngStream rng(0x5EED5EEDULL, 0);
  double c = std::numeric_limits<double>::infinity();
  const double f0 = report.value;
  for (int i = 0; i < 1000; ++i) {
    const TangentVector v = cone.scaled(cone.randomUnit(rng), ball * (0.1 + 0.9 * rng.uniform()));
    if (!exponentiable(space, mean, v)) continue;
    const Point x = expMap(space, mean, v);
    const double d = distance(space, x, mean);
    if (d == 0.0) continue;
    c = std::min(c, (frechetValue(space, m, x, opts.quadratureNodes) - f0) / (d * d));
  }
  report.convexityConstant = std::isfinite(c) ? c : 0.0;
  report.localized.convex = report.convexityConstant > 0.0;

  if (space.kind() == SpaceKind::SphereCap) {
    if (maxRadius >= 0.5 * std::numbers::pi) {
      report.localized.convex = false;
      report.notes.push_back("support is not inside a ball of radius pi/2 about the mean");
    }
    const Point pole = points::sphere(0.0, 0.0);
    for (const auto& a : m.discretized(space, opts.quadratureNodes))
      if (distance(space, pole, a.point) > space.supportRadius() + 1e-12) {
        report.notes.push_back("support leaves the configured cap");
        break;
      }
  }

  // Amenability evidence: the second-order coefficient of d^2/2 toward each atom over probe directions.
  double probe = 0.0;
  for (const auto& a : logged.atoms()) {
    for (int k = 0; k < 64; ++k) {
      const TangentVector t = cone.randomUnit(rng);
      double lam = 1.0;
      if (space.kind() == SpaceKind::SphereCap && !a.vector.isApex) {
        const double cb = std::cos(cone.angle(t, a.vector));
        const double d = a.vector.radius;
        lam = cb * cb + d / std::tan(d) * (1.0 - cb * cb);
      }
      probe = std::max(probe, std::abs(lam));
    }
  }
  report.amenableProbe = probe;
  report.amenable = std::isfinite(probe) && report.localized.logUnique;

  // Every measure on a CAT(0) cone is immured; elsewhere check that small-sample means log into the hull.
  if (space.isCat0()) {
    report.immured = true;
  } else if (report.localized.logUnique) {
    const ConeRepr hull = hullCone(cone, logged);
    bool ok = true;
    RngStream draws(0x1A2B3C4DULL, 1);
    for (int trial = 0; trial < 50 && ok; ++trial) {
      try {
        const FrechetReport sub = frechetMean(space, empiricalMeasure(sample(space, m, draws, 20)), opts);
        const TangentVector v = logMap(space, mean, sub.mean);
        ok = hull.contains(v, 1e-6);
      } catch (const Error&) {
        ok = false;
      }
    }
    report.immured = ok;
  }
  return report;
}

} // namespace stratmean
