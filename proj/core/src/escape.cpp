#include "stratmean/escape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "stratmean/errors.hpp"
#include "stratmean/link_function.hpp"

namespace stratmean {

namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

struct Candidate {
  TangentVector direction;
  double value = -kHuge;
};

// Replace `best` only on a strict improvement beyond rounding; otherwise keep the earlier
// (lower chart / smaller angle) witness.
void offer(Candidate& best, const TangentVector& dir, double value, double scale) {
  if (best.direction.isApex || value > best.value + 1e-14 * scale) best = {dir, value};
}

double deltaScale(const TangentMeasure& delta) {
  double s = 0.0;
  for (const auto& a : delta.atoms()) s += a.weight * a.vector.radius;
  return s;
}

EscapeResult linearEscape(const MeanContext& ctx, const TangentMeasure& delta) {
  EscapeResult res;
  const TangentCone& cone = ctx.cone;
  const Eigen::MatrixXd& q = ctx.escape.basis();
  if (q.cols() == 0) {
    res.clippedToApex = true;
    return res;
  }
  Eigen::VectorXd resultant = Eigen::VectorXd::Zero(cone.ambientDim());
  for (const auto& a : delta.atoms()) resultant += a.weight * cone.coords(a.vector);
  const Eigen::VectorXd b = q.transpose() * resultant;
  if (b.norm() == 0.0) {
    res.direction = cone.make(0, q.col(0));
    res.clippedToApex = true;
    return res;
  }
  const Eigen::MatrixXd reduced = q.transpose() * ctx.lambdaForm * q;
  const Eigen::VectorXd x = q * reduced.ldlt().solve(b);
  res.direction = cone.make(0, x / x.norm());
  const double lam = ctx.lambda(res.direction);
  const double p = pair(cone, delta, res.direction);
  res.objective = p / std::sqrt(lam);
  if (p <= 0.0) {
    res.clippedToApex = true;
    return res;
  }
  res.vector = cone.scaled(res.direction, p / (2.0 * lam));
  return res;
}

EscapeResult bookEscape(const MeanContext& ctx, const TangentMeasure& delta) {
  EscapeResult res;
  const TangentCone& cone = ctx.cone;
  const ConeRepr& e = ctx.escape;
  if (e.isApexOnly()) {
    res.clippedToApex = true;
    return res;
  }
  const int p = cone.spineDim();
  // pair(delta, theta) on page j is a_j . theta with a_j = (sum_on u - sum_off u, sum v).
  std::vector<double> onPage(cone.pages() + 1, 0.0);
  double all = 0.0;
  Eigen::VectorXd spine = Eigen::VectorXd::Zero(p);
  for (const auto& a : delta.atoms()) {
    const Eigen::VectorXd c = cone.coords(a.vector);
    spine += a.weight * c.tail(p);
    if (!a.vector.isApex && a.vector.chart > 0) {
      onPage[a.vector.chart] += a.weight * c[0];
      all += a.weight * c[0];
    }
  }
  const Eigen::MatrixXd& basis = e.basis();
  const Eigen::VectorXd spineProj = basis.cols() ? Eigen::VectorXd(basis * (basis.transpose() * spine)) : Eigen::VectorXd::Zero(p);
  const double scale = deltaScale(delta);
  Candidate best;
  if (basis.cols() > 0) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(1 + p);
    if (spineProj.norm() > 0.0) d.tail(p) = spineProj / spineProj.norm();
    else d.tail(p) = basis.col(0);
    offer(best, cone.make(0, d), spineProj.norm(), scale);
  }
  for (int j : e.pages()) {
    const double au = 2.0 * onPage[j] - all;
    Eigen::VectorXd d(1 + p);
    d << std::max(au, 0.0), spineProj;
    double value = d.norm();
    if (value == 0.0) {
      d.setZero();
      d[0] = 1.0;
      value = au;
    } else {
      d /= value;
    }
    offer(best, cone.make(d[0] > 0.0 ? j : 0, d), value, scale);
  }
  res.direction = best.direction;
  const double lam = ctx.lambda(res.direction);
  const double pr = pair(cone, delta, res.direction);
  res.objective = pr / std::sqrt(lam);
  if (pr <= 0.0) {
    res.clippedToApex = true;
    return res;
  }
  res.vector = cone.scaled(res.direction, pr / (2.0 * lam));
  return res;
}

EscapeResult arcEscape(const MeanContext& ctx, const TangentMeasure& delta) {
  EscapeResult res;
  const TangentCone& cone = ctx.cone;
  const ConeRepr& e = ctx.escape;
  if (e.isApexOnly()) {
    res.clippedToApex = true;
    return res;
  }
  const LinkFunction f(cone, delta);
  const double len = cone.linkLength();
  const double scale = deltaScale(delta);
  Candidate best;
  std::vector<Arc> segments;
  for (const auto& a : e.arcList()) {
    if (a.hi > len) {
      segments.push_back({a.lo, len});
      segments.push_back({0.0, a.hi - len});
    } else {
      segments.push_back(a);
    }
  }
  std::sort(segments.begin(), segments.end(), [](const Arc& x, const Arc& y) { return x.lo < y.lo; });
  for (const auto& s : segments) {
    const auto top = f.maxOn(s.lo, std::min(s.hi, len));
    double phi = top.phi >= len ? top.phi - len : top.phi;
    offer(best, cone.fromLink(phi, 1.0), top.value, scale);
  }
  res.direction = best.direction;
  const double lam = ctx.lambda(res.direction);
  const double pr = pair(cone, delta, res.direction);
  res.objective = pr / std::sqrt(lam);
  if (pr <= 0.0) {
    res.clippedToApex = true;
    return res;
  }
  res.vector = cone.scaled(res.direction, pr / (2.0 * lam));
  return res;
}

// F(exp X) - F(mean) - t pair(delta, X), with per-atom differences taken as (d - r)(d + r).
class PerturbedObjective {
public:
  PerturbedObjective(const MeanContext& ctx, const TangentMeasure& delta, double t)
      : ctx_(ctx), delta_(delta), t_(t), atoms_(ctx.measure.discretized(ctx.space, ctx.options.quadratureNodes)) {
    for (const auto& a : atoms_) radii_.push_back(distance(ctx.space, ctx.mean, a.point));
  }

  double operator()(const TangentVector& x) const {
    if (!exponentiable(ctx_.space, ctx_.mean, x)) return kHuge;
    const Point p = expMap(ctx_.space, ctx_.mean, x);
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const double d = distance(ctx_.space, p, atoms_[i].point);
      s += 0.5 * atoms_[i].weight * (d - radii_[i]) * (d + radii_[i]);
    }
    return s - t_ * pair(ctx_.cone, delta_, x);
  }

private:
  const MeanContext& ctx_;
  const TangentMeasure& delta_;
  double t_;
  std::vector<Atom> atoms_;
  std::vector<double> radii_;
};

template <class F>
std::pair<double, double> brent(F&& f, double lo, double hi) {
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(std::forward<F>(f), lo, hi, std::numeric_limits<double>::digits / 2, iters);
}

struct Best {
  TangentVector x;
  double value = 0.0;
};

// Cyclic coordinate descent with Brent line searches. Coordinate 0 is clamped to >= 0 when `halfSpace`.
template <class Build>
void coordinateDescent(const PerturbedObjective& g, Build&& build, int dims, bool halfSpace, double reach, Best& best) {
  std::vector<double> y(dims, 0.0);
  auto eval = [&](const std::vector<double>& z) { return g(build(z)); };
  double current = eval(y);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double moved = 0.0;
    for (int k = 0; k < dims; ++k) {
      const double lo = (halfSpace && k == 0) ? 0.0 : y[k] - reach;
      const double hi = y[k] + reach;
      std::vector<double> z = y;
      auto line = [&](double s) {
        z[k] = s;
        return eval(z);
      };
      const auto [s, v] = brent(line, lo, hi);
      if (v < current) {
        moved = std::max(moved, std::abs(s - y[k]));
        y[k] = s;
        current = v;
      }
    }
    if (moved <= 1e-13 * reach) break;
  }
  if (current < best.value) best = {build(y), current};
}

} // namespace

EscapeResult escapeVector(const MeanContext& ctx, const TangentMeasure& delta) {
  for (const auto& a : delta.atoms()) ctx.cone.validate(a.vector);
  switch (ctx.cone.kind()) {
  case ConeKind::Linear: return linearEscape(ctx, delta);
  case ConeKind::Book: return bookEscape(ctx, delta);
  default: return arcEscape(ctx, delta);
  }
}

TangentVector perturbedLog(const MeanContext& ctx, const TangentMeasure& delta, double t, double r) {
  if (!(t > 0.0) || !(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "t and r must be positive");
  if (delta.empty()) return TangentVector::apex();
  std::vector<Atom> extra;
  for (const auto& a : delta.atoms()) {
    const TangentVector v = ctx.cone.scaled(a.vector, r);
    if (!exponentiable(ctx.space, ctx.mean, v)) throw Error(ErrorCode::NotExponentiable, "perturbation leaves the chart");
    extra.push_back({expMap(ctx.space, ctx.mean, v), t * a.weight});
  }
  const FrechetReport moved = frechetMean(ctx.space, ctx.measure.plus(Measure(std::move(extra))), ctx.options);
  return ctx.cone.scaled(logMap(ctx.space, ctx.mean, moved.mean), 1.0 / (t * r));
}

TangentVector escapeFdOracle(const MeanContext& ctx, const TangentMeasure& delta, double t) {
  if (delta.empty()) return TangentVector::apex();
  double maxRadius = 0.0;
  bool ok = true;
  for (const auto& a : delta.atoms()) {
    maxRadius = std::max(maxRadius, a.vector.radius);
    ok = ok && exponentiable(ctx.space, ctx.mean, a.vector);
  }
  if (maxRadius == 0.0) return TangentVector::apex();
  const double r = ok ? 1.0 : 0.1 * expReach(ctx.space, ctx.mean) / maxRadius;
  return perturbedLog(ctx, delta, t, r);
}

TangentVector minimizePerturbed(const MeanContext& ctx, const TangentMeasure& delta, double t, const ConeRepr& domain) {
  if (!(domain.cone() == ctx.cone)) throw Error(ErrorCode::MismatchedSpaces, "domain is not a subcone of the tangent cone");
  Best best{TangentVector::apex(), 0.0};
  const double scale = deltaScale(delta);
  if (delta.empty() || scale == 0.0 || domain.isApexOnly()) return best.x;
  const PerturbedObjective g(ctx, delta, t);
  // Minimizers have |X| <= t * scale / (min Lambda); search a generous multiple of that.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ctx.lambdaForm);
  const double reach = 4.0 * t * scale / (2.0 * eig.eigenvalues()[0]);
  const TangentCone& cone = ctx.cone;
  switch (cone.kind()) {
  case ConeKind::Linear: {
    const Eigen::MatrixXd& q = domain.basis();
    auto build = [&](const std::vector<double>& y) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(cone.ambientDim());
      for (Eigen::Index k = 0; k < q.cols(); ++k) x += y[k] * q.col(k);
      return cone.make(0, x);
    };
    coordinateDescent(g, build, static_cast<int>(q.cols()), false, reach, best);
    break;
  }
  case ConeKind::Book: {
    const Eigen::MatrixXd& b = domain.basis();
    const int p = cone.spineDim();
    const int s = static_cast<int>(b.cols());
    if (s > 0) {
      auto build = [&](const std::vector<double>& y) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(1 + p);
        for (int k = 0; k < s; ++k) x.tail(p) += y[k] * b.col(k);
        return cone.make(0, x);
      };
      coordinateDescent(g, build, s, false, reach, best);
    }
    for (int j : domain.pages()) {
      auto build = [&, j](const std::vector<double>& y) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(1 + p);
        x[0] = y[0];
        for (int k = 0; k < s; ++k) x.tail(p) += y[k + 1] * b.col(k);
        return cone.make(x[0] > 0.0 ? j : 0, x);
      };
      coordinateDescent(g, build, 1 + s, true, reach, best);
    }
    break;
  }
  default: {
    const double len = cone.linkLength();
    auto radial = [&](double phi) {
      return brent([&](double r) { return g(cone.fromLink(phi, r)); }, 0.0, reach);
    };
    for (const auto& a : domain.arcList()) {
      const double lo = a.lo, hi = a.hi;
      auto atPhi = [&](double phi) { return phi >= len ? phi - len : phi; };
      if (hi - lo <= 1e-12) {
        const auto [r, v] = radial(atPhi(lo));
        if (v < best.value) best = {cone.fromLink(atPhi(lo), r), v};
        continue;
      }
      const int grid = 64;
      int bestK = 0;
      double bestV = kHuge;
      for (int k = 0; k <= grid; ++k) {
        const double v = radial(atPhi(lo + (hi - lo) * k / grid)).second;
        if (v < bestV) {
          bestV = v;
          bestK = k;
        }
      }
      const double a0 = lo + (hi - lo) * std::max(bestK - 1, 0) / grid;
      const double a1 = lo + (hi - lo) * std::min(bestK + 1, grid) / grid;
      const auto [phi, v] = brent([&](double x) { return radial(atPhi(x)).second; }, a0, a1);
      if (v < best.value) best = {cone.fromLink(atPhi(phi), radial(atPhi(phi)).first), v};
    }
    break;
  }
  }
  return best.x;
}

TangentVector escapeApprox(const MeanContext& ctx, const TangentMeasure& delta, double t, EscapeScheme scheme) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  if (scheme == EscapeScheme::C) {
    // argmin r^2 Lambda - t pair over the escape cone, solved in closed form at mass t, then rescaled.
    const EscapeResult r = escapeVector(ctx, scaleMass(delta, t));
    return ctx.cone.scaled(r.vector, 1.0 / t);
  }
  return ctx.cone.scaled(minimizePerturbed(ctx, delta, t, ctx.escape), 1.0 / t);
}

} // namespace stratmean
