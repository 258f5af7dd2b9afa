#include "stratmean/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "stratmean/errors.hpp"
#include "stratmean/nnls.hpp"

namespace stratmean {

namespace {

constexpr double kPi = std::numbers::pi;

double rmsRadius(const MeanContext& ctx) {
  if (ctx.mass <= 0.0) return 0.0;
  return std::sqrt(ctx.secondMoment / ctx.mass);
}

TangentVector randomVector(const TangentCone& cone, RngStream& rng, double scale) {
  return cone.scaled(cone.randomUnit(rng), scale * rng.uniform());
}

TangentVector randomInCone(const ConeRepr& c, RngStream& rng, double scale) {
  if (c.isApexOnly()) return TangentVector::apex();
  return c.cone().scaled(c.sampleUnit(rng), scale * rng.uniform());
}

// A nearby vector in the same chart, for the continuity probe.
TangentVector nudge(const TangentCone& cone, const TangentVector& v, double eps, RngStream& rng) {
  if (v.isApex) return cone.scaled(cone.randomUnit(rng), eps);
  switch (cone.kind()) {
  case ConeKind::Linear: {
    Eigen::VectorXd c = cone.coords(v);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] += eps * rng.normal();
    return cone.make(0, c);
  }
  case ConeKind::Book: {
    Eigen::VectorXd c = cone.coords(v);
    for (Eigen::Index i = 1; i < c.size(); ++i) c[i] += eps * rng.normal();
    if (v.chart > 0) c[0] = std::abs(c[0] + eps * rng.normal());
    return cone.make(c[0] > 0.0 ? v.chart : 0, c);
  }
  default: {
    const double len = cone.linkLength();
    double phi = cone.linkCoordinate(v) + eps * rng.normal();
    if (cone.kind() == ConeKind::Circle) phi = phi - len * std::floor(phi / len);
    else phi = std::clamp(phi, 0.0, len);
    return cone.fromLink(phi, std::abs(v.radius + eps * rng.normal()));
  }
  }
}

} // namespace

const char* collapseKindName(CollapseKind kind) {
  switch (kind) {
  case CollapseKind::Identity: return "identity";
  case CollapseKind::Zero: return "zero";
  case CollapseKind::PageFolding: return "page-folding";
  case CollapseKind::SpineOnly: return "spine-only";
  case CollapseKind::SectorFolding: return "sector-folding";
  case CollapseKind::Inclusion: return "inclusion";
  }
  return "?";
}

CollapseMap CollapseMap::identity(const TangentCone& cone) {
  if (cone.kind() != ConeKind::Linear) throw Error(ErrorCode::InvalidArgument, "identity collapse needs a linear cone");
  CollapseMap m;
  m.kind_ = CollapseKind::Identity;
  m.cone_ = cone;
  m.dim_ = cone.ambientDim();
  return m;
}

CollapseMap CollapseMap::zero(const TangentCone& cone) {
  CollapseMap m;
  m.kind_ = CollapseKind::Zero;
  m.cone_ = cone;
  m.dim_ = 0;
  return m;
}

CollapseMap CollapseMap::pageFolding(const TangentCone& cone, int page) {
  if (cone.kind() != ConeKind::Book || page < 1 || page > cone.pages())
    throw Error(ErrorCode::InvalidArgument, "page folding needs a book cone and a valid page");
  CollapseMap m;
  m.kind_ = CollapseKind::PageFolding;
  m.cone_ = cone;
  m.dim_ = 1 + cone.spineDim();
  m.page_ = page;
  return m;
}

CollapseMap CollapseMap::spineOnly(const TangentCone& cone) {
  if (cone.kind() != ConeKind::Book) throw Error(ErrorCode::InvalidArgument, "spine collapse needs a book cone");
  CollapseMap m;
  m.kind_ = CollapseKind::SpineOnly;
  m.cone_ = cone;
  m.dim_ = cone.spineDim();
  return m;
}

CollapseMap CollapseMap::sectorFolding(const TangentCone& cone, double baseAngle) {
  if (cone.kind() != ConeKind::Circle) throw Error(ErrorCode::InvalidArgument, "sector folding needs a circle cone");
  CollapseMap m;
  m.kind_ = CollapseKind::SectorFolding;
  m.cone_ = cone;
  m.dim_ = 2;
  m.base_ = baseAngle;
  return m;
}

CollapseMap CollapseMap::inclusion(const TangentCone& cone) {
  if (cone.kind() != ConeKind::Sector) throw Error(ErrorCode::InvalidArgument, "inclusion needs a sector cone");
  CollapseMap m;
  m.kind_ = CollapseKind::Inclusion;
  m.cone_ = cone;
  m.dim_ = 2;
  return m;
}

std::string CollapseMap::describe() const {
  std::ostringstream os;
  os << collapseKindName(kind_) << " -> R^" << dim_;
  if (kind_ == CollapseKind::PageFolding) os << " (page " << page_ << ")";
  if (kind_ == CollapseKind::SectorFolding) os << " (base " << base_ << ")";
  return os.str();
}

Eigen::VectorXd CollapseMap::unitImage(const TangentVector& v) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  switch (kind_) {
  case CollapseKind::Zero: break;
  case CollapseKind::Identity:
  case CollapseKind::Inclusion: out = v.direction; break;
  case CollapseKind::PageFolding:
    out = v.direction;
    if (v.chart != page_) out[0] = -out[0];
    break;
  case CollapseKind::SpineOnly: out = v.direction.tail(dim_); break;
  case CollapseKind::SectorFolding: {
    const double len = cone_.linkLength();
    double psi = cone_.linkCoordinate(v) - base_;
    psi -= len * std::floor(psi / len);
    if (psi > 0.5 * len) psi -= len;
    if (std::abs(psi) <= kPi) out << std::cos(psi), std::sin(psi);
    else out << -1.0, 0.0;
    break;
  }
  }
  return out;
}

Eigen::VectorXd CollapseMap::operator()(const TangentVector& v) const {
  if (v.isApex) return Eigen::VectorXd::Zero(dim_);
  return v.radius * unitImage(v);
}

Eigen::VectorXd CollapseMap::operator()(const TangentMeasure& delta) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  for (const auto& a : delta.atoms()) s += a.weight * (*this)(a.vector);
  return s;
}

int CollapseAxiomReport::firstFailure() const {
  if (!meanZero) return 1;
  if (!injective) return 2;
  if (!innerPreserved) return 3;
  if (!homogeneous) return 4;
  if (!continuous) return 5;
  return 0;
}

CollapseAxiomReport verifyCollapseAxioms(const CollapseMap& map, const MeanContext& ctx, int sampleBudget,
                                         std::uint64_t seed, const AxiomTolerances& tol) {
  if (!(map.cone() == ctx.cone)) throw Error(ErrorCode::MismatchedSpaces, "collapse map built for another cone");
  const TangentCone& cone = ctx.cone;
  const double scale = std::max(rmsRadius(ctx), 1.0);
  RngStream rng(seed, 0);
  CollapseAxiomReport rep;

  // 1. the pushforward of the logged measure has mean zero
  if (ctx.mass > 0.0) rep.meanResidual = (map(ctx.logged) / ctx.mass).norm() / scale;

  // Probe vectors inside the fluctuating cone: logged atoms that lie there plus random ones.
  std::vector<TangentVector> inside;
  std::vector<TangentVector> anywhere;
  for (const auto& a : ctx.logged.atoms()) {
    anywhere.push_back(a.vector);
    if (ctx.fluctuating.contains(a.vector)) inside.push_back(a.vector);
  }
  for (int i = 0; i < sampleBudget; ++i) {
    inside.push_back(randomInCone(ctx.fluctuating, rng, 2.0 * scale));
    anywhere.push_back(randomVector(cone, rng, 2.0 * scale));
  }

  // 2. isometry (hence injectivity) on the fluctuating cone
  for (int i = 0; i < sampleBudget; ++i) {
    const auto& u = inside[rng.nextU64() % inside.size()];
    const auto& v = inside[rng.nextU64() % inside.size()];
    const double d = cone.distance(u, v);
    const double img = (map(u) - map(v)).norm();
    rep.isometryResidual = std::max(rep.isometryResidual, std::abs(img - d) / (1.0 + u.radius + v.radius));
  }

  // 3. inner products against the fluctuating cone
  for (int i = 0; i < sampleBudget; ++i) {
    const auto& u = inside[rng.nextU64() % inside.size()];
    const auto& v = anywhere[rng.nextU64() % anywhere.size()];
    const double ip = cone.inner(u, v);
    const double img = map.targetDim() ? map(u).dot(map(v)) : 0.0;
    rep.innerResidual = std::max(rep.innerResidual, std::abs(img - ip) / (1.0 + u.radius * v.radius));
  }

  // 4. positive homogeneity
  const double factors[] = {0.0, 0.5, 2.0, 10.0};
  for (int i = 0; i < sampleBudget; ++i) {
    const auto& v = anywhere[i % anywhere.size()];
    const double t = (i % 5 < 4) ? factors[i % 5] : 10.0 * rng.uniform();
    const Eigen::VectorXd lhs = map(cone.scaled(v, t));
    const Eigen::VectorXd rhs = t * map(v);
    rep.homogeneityResidual = std::max(rep.homogeneityResidual, (lhs - rhs).norm() / (1.0 + t * v.radius));
  }

  // 5. continuity, as the largest image/cone distance ratio over nearby and far pairs
  for (int i = 0; i < sampleBudget; ++i) {
    const auto& v = anywhere[rng.nextU64() % anywhere.size()];
    const double eps = scale * std::pow(10.0, -1.0 - 5.0 * rng.uniform());
    const TangentVector w = (i % 2 == 0) ? nudge(cone, v, eps, rng) : anywhere[rng.nextU64() % anywhere.size()];
    const double d = cone.distance(v, w);
    if (d <= 0.0) continue;
    rep.continuityModulus = std::max(rep.continuityModulus, (map(v) - map(w)).norm() / d);
  }

  rep.meanZero = rep.meanResidual <= tol.mean;
  rep.injective = rep.isometryResidual <= tol.isometry;
  rep.innerPreserved = rep.innerResidual <= tol.inner;
  rep.homogeneous = rep.homogeneityResidual <= tol.homogeneity;
  rep.continuous = rep.continuityModulus <= tol.continuityBound;
  return rep;
}

CollapseMap chooseCollapse(const MeanContext& ctx) {
  const TangentCone& cone = ctx.cone;
  CollapseMap map;
  if (cone.kind() == ConeKind::Linear) {
    map = CollapseMap::identity(cone);
  } else if (ctx.fluctuating.isApexOnly()) {
    map = CollapseMap::zero(cone);
  } else if (cone.kind() == ConeKind::Book) {
    const auto& pages = ctx.fluctuating.pages();
    map = pages.empty() ? CollapseMap::spineOnly(cone) : CollapseMap::pageFolding(cone, pages.front());
  } else if (cone.kind() == ConeKind::Circle) {
    const Arc a = ctx.fluctuating.arcList().front();
    map = CollapseMap::sectorFolding(cone, std::fmod(0.5 * (a.lo + a.hi), cone.linkLength()));
  } else {
    map = CollapseMap::inclusion(cone);
  }
  const CollapseAxiomReport rep = verifyCollapseAxioms(map, ctx);
  if (!rep.ok()) {
    std::ostringstream os;
    os << map.describe() << " fails collapse axiom " << rep.firstFailure() << " (mean " << rep.meanResidual
       << ", isometry " << rep.isometryResidual << ", inner " << rep.innerResidual << ", homogeneity "
       << rep.homogeneityResidual << ", modulus " << rep.continuityModulus << ")";
    throw AxiomError(rep.firstFailure(), os.str());
  }
  return map;
}

Eigen::MatrixXd collapsedCovariance(const CollapseMap& map, const TangentMeasure& logged) {
  const int m = map.targetDim();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(m, m);
  const double total = logged.totalMass();
  if (total <= 0.0 || m == 0) return sigma;
  for (const auto& a : logged.atoms()) {
    const Eigen::VectorXd y = map(a.vector);
    sigma += (a.weight / total) * y * y.transpose();
  }
  return 0.5 * (sigma + sigma.transpose());
}

double tangentFieldCov(const MeanContext& ctx, const TangentVector& v, const TangentVector& w) {
  const double total = ctx.logged.totalMass();
  if (total <= 0.0) return 0.0;
  double mv = 0.0, mw = 0.0;
  for (const auto& a : ctx.logged.atoms()) {
    mv += a.weight / total * ctx.cone.inner(a.vector, v);
    mw += a.weight / total * ctx.cone.inner(a.vector, w);
  }
  double k = 0.0;
  for (const auto& a : ctx.logged.atoms())
    k += a.weight / total * (ctx.cone.inner(a.vector, v) - mv) * (ctx.cone.inner(a.vector, w) - mw);
  return k;
}

CollapsedModel::CollapsedModel(MeanContext ctx) : ctx_(std::move(ctx)) {
  map_ = chooseCollapse(ctx_);
  build();
}

CollapsedModel::CollapsedModel(MeanContext ctx, CollapseMap map) : ctx_(std::move(ctx)), map_(std::move(map)) {
  if (!(map_.cone() == ctx_.cone)) throw Error(ErrorCode::MismatchedSpaces, "collapse map built for another cone");
  build();
}

void CollapsedModel::build() {
  const int m = map_.targetDim();
  sigma_ = collapsedCovariance(map_, ctx_.logged);
  hull_ = Eigen::MatrixXd(m, 0);
  variances_ = Eigen::VectorXd(0);
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_);
    const double trace = sigma_.trace();
    std::vector<int> keep;
    for (int i = m - 1; i >= 0; --i) {
      const double lam = eig.eigenvalues()[i];
      if (lam < -1e-12 * std::max(trace, 1.0)) throw Error(ErrorCode::InvalidArgument, "collapsed covariance is not PSD");
      if (lam > 1e-12 * trace) keep.push_back(i);
    }
    hull_.resize(m, static_cast<Eigen::Index>(keep.size()));
    variances_.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      Eigen::VectorXd col = eig.eigenvectors().col(keep[k]);
      // Sign convention: largest-magnitude entry positive.
      Eigen::Index arg;
      col.cwiseAbs().maxCoeff(&arg);
      if (col[arg] < 0.0) col = -col;
      hull_.col(static_cast<Eigen::Index>(k)) = col;
      variances_[static_cast<Eigen::Index>(k)] = eig.eigenvalues()[keep[k]];
    }
  }
  for (const auto& a : ctx_.logged.atoms()) {
    if (a.vector.isApex) continue;
    const TangentVector u = ctx_.cone.unit(a.vector);
    bool seen = false;
    for (const auto& g : generators_) seen = seen || ctx_.cone.distance(g.direction, u) <= 1e-12;
    if (!seen) generators_.push_back({u, map_(u)});
  }
}

void CollapsedModel::checkInHull(const Eigen::VectorXd& v) const {
  if (v.size() != map_.targetDim()) throw Error(ErrorCode::InvalidArgument, "section target has the wrong dimension");
  const Eigen::VectorXd off = v - hull_ * (hull_.transpose() * v);
  if (off.norm() > 1e-10 * (1.0 + v.norm())) throw Error(ErrorCode::Infeasible, "vector lies outside the collapsed hull");
}

TangentMeasure CollapsedModel::sectionOrdered(const Eigen::VectorXd& v, const std::vector<int>& order) const {
  checkInHull(v);
  TangentMeasure out;
  if (v.norm() == 0.0) return out;
  const Eigen::Index ell = hull_.cols();
  const Eigen::VectorXd c = hull_.transpose() * v;
  const int g = static_cast<int>(order.size());
  const double tol = 1e-10 * (1.0 + v.norm());
  auto image = [&](int k) -> Eigen::VectorXd { return hull_.transpose() * generators_[order[k]].image; };

  auto accept = [&](const std::vector<int>& subset, const Eigen::VectorXd& w) {
    for (std::size_t k = 0; k < subset.size(); ++k)
      if (w[static_cast<Eigen::Index>(k)] > 0.0) out.add(generators_[order[subset[k]]].direction, w[static_cast<Eigen::Index>(k)]);
    if ((map_(out) - v).norm() > tol) {
      out = TangentMeasure();
      return false;
    }
    return true;
  };

  // Depth-first enumeration in lexicographic order of index sets, capped in work.
  long budget = 20000;
  std::vector<int> subset;
  bool found = false;
  auto trySubset = [&]() {
    Eigen::MatrixXd a(ell, static_cast<Eigen::Index>(subset.size()));
    for (std::size_t k = 0; k < subset.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = image(subset[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < static_cast<Eigen::Index>(subset.size())) return false;
    const Eigen::VectorXd w = qr.solve(c);
    if ((a * w - c).norm() > tol) return false;
    if (w.minCoeff() < -1e-12 * (1.0 + v.norm())) return false;
    return accept(subset, w.cwiseMax(0.0));
  };
  std::function<void(int)> dfs = [&](int from) {
    for (int k = from; k < g && !found && budget > 0; ++k) {
      subset.push_back(k);
      --budget;
      if (trySubset()) found = true;
      else if (static_cast<Eigen::Index>(subset.size()) < ell) dfs(k + 1);
      subset.pop_back();
    }
  };
  dfs(0);
  if (found) return out;

  Eigen::MatrixXd a(ell, g);
  for (int k = 0; k < g; ++k) a.col(k) = image(k);
  const NnlsResult r = nnls(a, c);
  std::vector<int> all(g);
  for (int k = 0; k < g; ++k) all[k] = k;
  if (r.residual <= tol && accept(all, r.x)) return out;
  throw Error(ErrorCode::Infeasible, "no nonnegative section found");
}

TangentMeasure CollapsedModel::section(const Eigen::VectorXd& v) const {
  std::vector<int> order(generators_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  return sectionOrdered(v, order);
}

TangentMeasure CollapsedModel::randomSection(const Eigen::VectorXd& v, RngStream& rng) const {
  std::vector<int> order(generators_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.nextU64() % k]);
  TangentMeasure out = sectionOrdered(v, order);
  // The normalized logged measure collapses to zero, so any multiple of it can be added.
  const double s = rng.uniform();
  const double total = ctx_.logged.totalMass();
  if (s > 0.0 && total > 0.0)
    for (const auto& a : ctx_.logged.atoms())
      if (!a.vector.isApex) out.add(a.vector, s * a.weight / total);
  return out;
}

TangentVector CollapsedModel::distortion(const Eigen::VectorXd& v) const {
  return escapeVector(ctx_, section(v)).vector;
}

Eigen::VectorXd CollapsedModel::drawLinear(RngStream& rng) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(map_.targetDim());
  for (Eigen::Index k = 0; k < hull_.cols(); ++k) x += std::sqrt(variances_[k]) * rng.normal() * hull_.col(k);
  return x;
}

GaussianMassSample CollapsedModel::sampleGaussianMass(RngStream& rng) const {
  GaussianMassSample s;
  s.linearDraw = drawLinear(rng);
  s.mass = section(s.linearDraw);
  return s;
}

std::vector<TangentVector> limitSample(const CollapsedModel& model, std::uint64_t seed, std::uint64_t firstStream,
                                       std::size_t n, LimitPath path) {
  std::vector<TangentVector> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, firstStream + i);
    if (path == LimitPath::EscapeOfSection) rows.push_back(escapeVector(model.context(), model.sampleGaussianMass(rng).mass).vector);
    else rows.push_back(model.distortion(model.drawLinear(rng)));
  }
  return rows;
}

} // namespace stratmean
