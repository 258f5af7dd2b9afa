#include "stratmean/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stratmean/errors.hpp"
#include "stratmean/link_function.hpp"

namespace stratmean {

namespace {

constexpr double kPi = std::numbers::pi;

double valueOf(const SpaceModel& space, const std::vector<Atom>& atoms, const Point& p) {
  double s = 0.0;
  for (const auto& a : atoms) {
    const double d = distance(space, p, a.point);
    s += a.weight * d * d;
  }
  return 0.5 * s;
}

double massOf(const std::vector<Atom>& atoms) {
  double m = 0.0;
  for (const auto& a : atoms) m += a.weight;
  return m;
}

TangentMeasure logged(const SpaceModel& space, const Point& base, const std::vector<Atom>& atoms) {
  std::vector<TangentAtom> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back({logMap(space, base, a.point), a.weight});
  return TangentMeasure(std::move(out));
}

// Closed form: on page j the Frechet function is 1/2 sum w |y - v|^2 + 1/2 sum w (s -+ u)^2.
Point bookMean(const SpaceModel& space, const std::vector<Atom>& atoms) {
  const int p = space.spineDim();
  const double total = massOf(atoms);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  std::vector<double> onPage(space.pages() + 1, 0.0);
  double allPages = 0.0;
  for (const auto& a : atoms) {
    v += a.weight * a.point.coords.tail(p);
    onPage[a.point.stratum] += a.weight * a.point.coords[0];
    if (a.point.stratum != 0) allPages += a.weight * a.point.coords[0];
  }
  v /= total;
  int bestPage = 0;
  double bestShift = 0.0;
  for (int j = 1; j <= space.pages(); ++j) {
    const double shift = (2.0 * onPage[j] - allPages) / total;
    if (shift > bestShift) {
      bestShift = shift;
      bestPage = j;
    }
  }
  Eigen::VectorXd c(1 + p);
  c << bestShift, v;
  return makePoint(space, bestPage, c);
}

struct Routed {
  bool viaSingularPoint;
  double farRadius;
};

// Damped Newton in the flat chart at a regular point of the planar cone or the quadrant complement.
// Atoms reached through the singular point contribute (|x| + r)^2 / 2, whose Hessian is
// xhat xhat^T + (|x| + r)/|x| (I - xhat xhat^T).
Point flatNewton(const SpaceModel& space, const std::vector<Atom>& atoms, Point x, int maxIter, int& iterations,
                 double tol) {
  const Point origin = basePoint(space);
  double fx = valueOf(space, atoms, x);
  for (iterations = 0; iterations < maxIter; ++iterations) {
    if (x.stratum == 0) break;
    const TangentCone cone = tangentCone(space, x);
    const double rx = distance(space, origin, x);
    Eigen::Vector2d xhat;
    if (space.kind() == SpaceKind::PlanarCone)
      xhat << 1.0, 0.0;
    else
      xhat = Eigen::Vector2d(x.coords[0], x.coords[1]) / rx;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    double scale = 0.0;
    for (const auto& a : atoms) {
      const TangentVector y = logMap(space, x, a.point);
      const Eigen::VectorXd yc = cone.coords(y);
      grad -= a.weight * Eigen::Vector2d(yc[0], yc[1]);
      scale += a.weight * y.radius;
      const double rq = distance(space, origin, a.point);
      const bool routed = y.radius >= rx + rq - 1e-13 * (rx + rq) && rq > 0.0;
      if (routed) {
        const Eigen::Matrix2d proj = xhat * xhat.transpose();
        hess += a.weight * (proj + (rx + rq) / rx * (Eigen::Matrix2d::Identity() - proj));
      } else {
        hess += a.weight * Eigen::Matrix2d::Identity();
      }
    }
    if (grad.norm() <= tol * (1.0 + scale)) break;
    Eigen::Vector2d step = -hess.ldlt().solve(grad);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 80; ++k, t *= 0.5) {
      const TangentVector v = cone.make(0, t * step);
      if (v.isApex) break;
      if (!exponentiable(space, x, v)) continue;
      const Point cand = expMap(space, x, v);
      const double fc = valueOf(space, atoms, cand);
      if (fc <= fx + 1e-4 * t * grad.dot(step)) {
        x = cand;
        fx = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

struct SphereRun {
  Point point;
  double value;
  double minCurvature;
  int iterations;
  bool ok;
};

SphereRun sphereNewton(const SpaceModel& space, const std::vector<Atom>& atoms, Point x, int maxIter, double tol) {
  SphereRun run{x, 0.0, 0.0, 0, false};
  try {
    double fx = valueOf(space, atoms, x);
    const TangentCone cone = TangentCone::linear(2);
    for (run.iterations = 0; run.iterations < maxIter; ++run.iterations) {
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
      for (const auto& a : atoms) {
        const TangentVector y = logMap(space, x, a.point);
        if (y.isApex) {
          hess += a.weight * Eigen::Matrix2d::Identity();
          continue;
        }
        const Eigen::Vector2d u(y.direction[0], y.direction[1]);
        const double d = y.radius;
        grad -= a.weight * d * u;
        const Eigen::Matrix2d proj = u * u.transpose();
        hess += a.weight * (proj + d / std::tan(d) * (Eigen::Matrix2d::Identity() - proj));
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(hess);
      run.minCurvature = eig.eigenvalues()[0];
      if (grad.norm() <= tol) break;
      Eigen::Vector2d step = run.minCurvature > 0.0 ? Eigen::Vector2d(-hess.ldlt().solve(grad)) : Eigen::Vector2d(-grad);
      double t = 1.0;
      bool moved = false;
      for (int k = 0; k < 80; ++k, t *= 0.5) {
        const TangentVector v = cone.make(0, t * step);
        if (v.isApex) break;
        if (!exponentiable(space, x, v)) continue;
        const Point cand = expMap(space, x, v);
        const double fc = valueOf(space, atoms, cand);
        if (fc <= fx + 1e-4 * t * grad.dot(step)) {
          x = cand;
          fx = fc;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    run.point = x;
    run.value = fx;
    run.ok = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CutLocus && e.code() != ErrorCode::NotExponentiable) throw;
  }
  return run;
}

} // namespace

double frechetValue(const SpaceModel& space, const Measure& m, const Point& p, int quadratureNodes) {
  return valueOf(space, m.discretized(space, quadratureNodes), p);
}

double optimalityResidual(const TangentCone& cone, const TangentMeasure& logged) {
  switch (cone.kind()) {
  case ConeKind::Linear: {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(cone.ambientDim());
    for (const auto& a : logged.atoms()) s += a.weight * cone.coords(a.vector);
    return s.norm();
  }
  case ConeKind::Book: {
    Eigen::VectorXd spine = Eigen::VectorXd::Zero(cone.spineDim());
    std::vector<double> onPage(cone.pages() + 1, 0.0);
    double all = 0.0;
    for (const auto& a : logged.atoms()) {
      const Eigen::VectorXd c = cone.coords(a.vector);
      spine += a.weight * c.tail(cone.spineDim());
      if (!a.vector.isApex && a.vector.chart > 0) {
        onPage[a.vector.chart] += a.weight * c[0];
        all += a.weight * c[0];
      }
    }
    double r = spine.norm();
    for (int j = 1; j <= cone.pages(); ++j) r = std::max(r, 2.0 * onPage[j] - all);
    return r;
  }
  case ConeKind::Circle:
  case ConeKind::Sector: {
    const LinkFunction g(cone, logged);
    return std::max(0.0, g.maxOn(0.0, cone.linkLength()).value);
  }
  }
  return 0.0;
}

FrechetReport frechetMean(const SpaceModel& space, const Measure& m, const FrechetOptions& opts) {
  if (m.empty()) throw Error(ErrorCode::EmptyMeasure, "Frechet mean of an empty measure");
  const std::vector<Atom> atoms = m.discretized(space, opts.quadratureNodes);
  const double total = massOf(atoms);
  FrechetReport report;
  switch (space.kind()) {
  case SpaceKind::Euclidean: {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(space.dimension());
    for (const auto& a : atoms) s += a.weight * a.point.coords;
    report.mean = Point{0, s / total};
    report.solver = "weighted-average";
    break;
  }
  case SpaceKind::Spider:
  case SpaceKind::OpenBook:
    report.mean = bookMean(space, atoms);
    report.solver = "fold-and-average";
    break;
  case SpaceKind::PlanarCone:
  case SpaceKind::QuadrantComplement: {
    const Point origin = basePoint(space);
    const TangentCone cone = tangentCone(space, origin);
    const TangentMeasure hat = logged(space, origin, atoms);
    const LinkFunction g(cone, hat);
    const auto top = g.maxOn(0.0, cone.linkLength());
    report.solver = "apex-test+newton";
    if (top.value <= 1e-12 * g.scale()) {
      report.mean = origin;
      if (space.kind() == SpaceKind::PlanarCone) break;
    }
    // Start from the first-order displacement away from the singular point, plus every atom.
    std::vector<Point> starts;
    if (top.value > 0.0) starts.push_back(expMap(space, origin, cone.fromLink(top.phi, top.value / total)));
    if (space.kind() == SpaceKind::QuadrantComplement)
      for (const auto& a : atoms)
        if (a.point.stratum != 0) starts.push_back(a.point);
    double best = report.mean.coords.size() ? valueOf(space, atoms, report.mean) : INFINITY;
    for (const auto& s : starts) {
      int it = 0;
      const Point cand = flatNewton(space, atoms, s, opts.maxIterations, it, 1e-14);
      report.iterations += it;
      const double v = valueOf(space, atoms, cand);
      if (!std::isfinite(best) || v < best - 1e-13 * (1.0 + std::abs(best))) {
        best = v;
        report.mean = cand;
      } else if (std::abs(v - best) <= 1e-13 * (1.0 + std::abs(best)) && report.mean.coords.size() &&
                 distance(space, cand, report.mean) > 1e-6) {
        throw Error(ErrorCode::NonUniqueMean, "two separated minimizers with equal Frechet value");
      }
    }
    if (report.mean.coords.size() == 0) throw Error(ErrorCode::SolverFailure, "no Frechet mean candidate");
    break;
  }
  case SpaceKind::SphereCap: {
    std::vector<Point> starts;
    Eigen::Vector3d extrinsic = Eigen::Vector3d::Zero();
    for (const auto& a : atoms) {
      const double c = a.point.coords[0], l = a.point.coords[1];
      extrinsic += a.weight * Eigen::Vector3d(std::sin(c) * std::cos(l), std::sin(c) * std::sin(l), std::cos(c));
    }
    if (extrinsic.norm() > 1e-12) {
      extrinsic.normalize();
      starts.push_back(points::sphere(std::atan2(std::hypot(extrinsic[0], extrinsic[1]), extrinsic[2]),
                                      std::atan2(extrinsic[1], extrinsic[0])));
    }
    starts.push_back(points::sphere(0.0, 0.0));
    for (std::size_t i = 0; i < atoms.size() && i < 8; ++i) starts.push_back(atoms[i].point);
    report.solver = "riemannian-newton";
    std::vector<SphereRun> runs;
    for (const auto& s : starts) {
      SphereRun r = sphereNewton(space, atoms, s, opts.maxIterations, 1e-14 * total);
      report.iterations += r.iterations;
      if (r.ok) runs.push_back(r);
    }
    if (runs.empty()) throw Error(ErrorCode::SolverFailure, "sphere solver failed from every start");
    auto best = std::min_element(runs.begin(), runs.end(), [](auto& a, auto& b) { return a.value < b.value; });
    for (const auto& r : runs) {
      if (std::abs(r.value - best->value) <= 1e-12 * (1.0 + best->value) &&
          distance(space, r.point, best->point) > 1e-6)
        throw Error(ErrorCode::NonUniqueMean, "separated minimizers with equal Frechet value");
    }
    if (best->minCurvature <= 1e-8 * total)
      throw Error(ErrorCode::NonUniqueMean, "Frechet function is flat along a direction at the minimizer");
    report.mean = best->point;
    break;
  }
  }
  report.value = valueOf(space, atoms, report.mean);
  report.gradientResidual = optimalityResidual(tangentCone(space, report.mean), logged(space, report.mean, atoms));
  const double tol = space.kind() == SpaceKind::SphereCap ? opts.sphereTolerance : opts.meanTolerance;
  if (report.gradientResidual > tol * std::max(1.0, total))
    report.notes.push_back("first-order residual above tolerance");
  return report;
}

Point inductiveMean(const SpaceModel& space, const Measure& m, long steps) {
  if (m.empty()) throw Error(ErrorCode::EmptyMeasure, "inductive mean of an empty measure");
  const std::vector<Atom> atoms = m.discretized(space);
  const double total = massOf(atoms);
  std::vector<double> w;
  for (const auto& a : atoms) w.push_back(a.weight / total);
  std::vector<long> visits(atoms.size(), 0);
  auto pick = [&](long k) {
    std::size_t best = 0;
    double deficit = -INFINITY;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = w[i] * static_cast<double>(k) - static_cast<double>(visits[i]);
      if (d > deficit + 1e-12) {
        deficit = d;
        best = i;
      }
    }
    ++visits[best];
    return best;
  };
  Point b = atoms[pick(1)].point;
  for (long k = 1; k < steps; ++k) {
    const Point& x = atoms[pick(k + 1)].point;
    b = geodesic(space, b, x)(1.0 / static_cast<double>(k + 1));
  }
  return b;
}

} // namespace stratmean
