#include "stratmean/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrapPeriod(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

// --- sphere helpers -------------------------------------------------------

Eigen::Vector3d sphereUnit(const Point& p) {
  const double c = p.coords[0], l = p.coords[1];
  return {std::sin(c) * std::cos(l), std::sin(c) * std::sin(l), std::cos(c)};
}

Point sphereFromUnit(const Eigen::Vector3d& x) {
  Eigen::VectorXd c(2);
  c << std::atan2(std::hypot(x[0], x[1]), x[2]), std::atan2(x[1], x[0]);
  return points::sphere(c[0], c[1]);
}

// Frame at p: the rotation carrying the north pole to p along its meridian, applied to e_x, e_y.
std::pair<Eigen::Vector3d, Eigen::Vector3d> sphereFrame(const Point& p) {
  const double c = p.coords[0], l = p.coords[1];
  const Eigen::Vector3d axis(-std::sin(l), std::cos(l), 0.0);
  auto rotate = [&](const Eigen::Vector3d& v) -> Eigen::Vector3d {
    return v * std::cos(c) + axis.cross(v) * std::sin(c) + axis * axis.dot(v) * (1.0 - std::cos(c));
  };
  return {rotate(Eigen::Vector3d::UnitX()), rotate(Eigen::Vector3d::UnitY())};
}

double sphereDistance(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  return std::atan2(x.cross(y).norm(), x.dot(y));
}

// --- book helpers ---------------------------------------------------------

// Coordinates of q in the plane obtained by unfolding the page of p onto u < 0.
Eigen::VectorXd unfoldedAgainst(const Point& p, const Point& q) {
  Eigen::VectorXd a = p.coords;
  if (p.stratum != 0 && q.stratum != 0 && p.stratum != q.stratum) a[0] = -a[0];
  return a;
}

double bookDistance(const Point& p, const Point& q) {
  return (unfoldedAgainst(p, q) - q.coords).norm();
}

// --- planar cone helpers ---------------------------------------------------

// Signed angular offset of b relative to a, in (-angle/2, angle/2].
double signedOffset(double a, double b, double period) {
  double d = wrapPeriod(b - a, period);
  if (d > 0.5 * period) d -= period;
  return d;
}

double coneSeparation(const SpaceModel& s, const Point& p, const Point& q) {
  const double a = std::max(p.coords[1], q.coords[1]), b = std::min(p.coords[1], q.coords[1]);
  const double d = wrapPeriod(a - b, s.coneAngle());
  return std::min(d, s.coneAngle() - d);
}

// --- quadrant complement helpers -------------------------------------------

double quadrantChartAngle(const Point& p) { return std::atan2(p.coords[1], p.coords[0]) + 0.5 * kPi; }

bool quadrantVisible(const Point& p, const Point& q) {
  if (p.stratum == 0 || q.stratum == 0) return true;
  return std::abs(quadrantChartAngle(p) - quadrantChartAngle(q)) <= kPi;
}

// Closure of {t in [0,1] : start + t*step < 0} for one coordinate.
std::pair<double, double> negativeInterval(double start, double step) {
  if (step == 0.0) return start < 0.0 ? std::pair{0.0, 1.0} : std::pair{1.0, 0.0};
  const double root = -start / step;
  if (step > 0.0) return {0.0, std::min(1.0, root)};
  return {std::max(0.0, root), 1.0};
}

bool segmentAvoidsQuadrant(const Eigen::Vector2d& p, const Eigen::Vector2d& step) {
  const auto [ax, bx] = negativeInterval(p[0], step[0]);
  const auto [ay, by] = negativeInterval(p[1], step[1]);
  const double lo = std::max(ax, ay), hi = std::min(bx, by);
  return hi - lo <= 1e-14;
}

void requireKind(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ChartMismatch, what);
}

void checkPoint(const SpaceModel& s, const Point& p) {
  requireKind(p.coords.size() == s.coordDim(), "point coordinates have wrong length for this space");
}

} // namespace

// --- SpaceModel ------------------------------------------------------------

SpaceModel SpaceModel::euclidean(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "euclidean dimension must be >= 1");
  SpaceModel s;
  s.kind_ = SpaceKind::Euclidean;
  s.dim_ = dim;
  return s;
}

SpaceModel SpaceModel::sphereCap(double supportRadius) {
  if (!(supportRadius > 0.0 && supportRadius < 0.5 * kPi))
    throw Error(ErrorCode::InvalidArgument, "sphere cap support radius must lie in (0, pi/2)");
  SpaceModel s;
  s.kind_ = SpaceKind::SphereCap;
  s.dim_ = 2;
  s.radius_ = supportRadius;
  return s;
}

SpaceModel SpaceModel::spider(int legs) {
  if (legs < 3) throw Error(ErrorCode::InvalidArgument, "spider needs at least 3 legs");
  SpaceModel s;
  s.kind_ = SpaceKind::Spider;
  s.dim_ = 1;
  s.pages_ = legs;
  return s;
}

SpaceModel SpaceModel::openBook(int pages, int spineDim) {
  if (pages < 3 || spineDim < 1) throw Error(ErrorCode::InvalidArgument, "open book needs >= 3 pages and spine >= 1");
  SpaceModel s;
  s.kind_ = SpaceKind::OpenBook;
  s.dim_ = 1 + spineDim;
  s.pages_ = pages;
  s.spine_ = spineDim;
  return s;
}

SpaceModel SpaceModel::planarCone(double totalAngle) {
  if (!(totalAngle >= kTwoPi - 1e-12) || !std::isfinite(totalAngle))
    throw Error(ErrorCode::InvalidArgument, "cone angle must be >= 2pi");
  SpaceModel s;
  s.kind_ = SpaceKind::PlanarCone;
  s.dim_ = 2;
  s.angle_ = std::max(totalAngle, kTwoPi);
  return s;
}

SpaceModel SpaceModel::quadrantComplement() {
  SpaceModel s;
  s.kind_ = SpaceKind::QuadrantComplement;
  s.dim_ = 2;
  return s;
}

int SpaceModel::coordDim() const noexcept {
  switch (kind_) {
  case SpaceKind::Euclidean: return dim_;
  case SpaceKind::SphereCap: return 2;
  case SpaceKind::Spider: return 1;
  case SpaceKind::OpenBook: return 1 + spine_;
  case SpaceKind::PlanarCone: return 2;
  case SpaceKind::QuadrantComplement: return 2;
  }
  return 0;
}

bool SpaceModel::isCat0() const noexcept {
  return kind_ != SpaceKind::SphereCap && kind_ != SpaceKind::QuadrantComplement;
}

std::string SpaceModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
  case SpaceKind::Euclidean: os << "euclidean(d=" << dim_ << ")"; break;
  case SpaceKind::SphereCap: os << "sphere_cap(supportRadius=" << radius_ << ")"; break;
  case SpaceKind::Spider: os << "spider(k=" << pages_ << ")"; break;
  case SpaceKind::OpenBook: os << "open_book(k=" << pages_ << ",p=" << spine_ << ")"; break;
  case SpaceKind::PlanarCone: os << "planar_cone(angle=" << angle_ << ")"; break;
  case SpaceKind::QuadrantComplement: os << "quadrant_complement"; break;
  }
  return os.str();
}

// --- points ----------------------------------------------------------------

bool operator==(const Point& a, const Point& b) { return a.stratum == b.stratum && a.coords == b.coords; }

Point makePoint(const SpaceModel& space, int stratum, const Eigen::VectorXd& coords) {
  if (coords.size() != space.coordDim()) throw Error(ErrorCode::ChartMismatch, "coordinate length mismatch");
  if (!coords.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite coordinates");
  Point p{stratum, coords};
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    requireKind(stratum == 0, "euclidean points live in stratum 0");
    break;
  case SpaceKind::SphereCap: {
    requireKind(stratum == 0, "sphere points live in stratum 0");
    double c = coords[0];
    requireKind(c >= -1e-12 && c <= kPi + 1e-12, "colatitude outside [0, pi]");
    c = std::clamp(c, 0.0, kPi);
    double l = wrapPeriod(coords[1] + kPi, kTwoPi) - kPi;
    if (l == -kPi) l = kPi;
    if (c == 0.0 || c == kPi) l = 0.0;
    p.coords << c, l;
    break;
  }
  case SpaceKind::Spider:
  case SpaceKind::OpenBook: {
    requireKind(stratum >= 0 && stratum <= space.pages(), "page index out of range");
    if (stratum == 0) {
      requireKind(std::abs(coords[0]) <= 1e-12, "spine points need u = 0");
      p.coords[0] = 0.0;
    } else {
      requireKind(coords[0] >= 0.0, "page points need u >= 0");
      if (coords[0] == 0.0) p.stratum = 0;
    }
    break;
  }
  case SpaceKind::PlanarCone: {
    requireKind(stratum == 0 || stratum == 1, "planar cone strata are 0 (apex) and 1");
    requireKind(coords[0] >= 0.0, "negative cone radius");
    if (stratum == 0) requireKind(coords[0] == 0.0, "apex needs r = 0");
    if (coords[0] == 0.0) {
      p.stratum = 0;
      p.coords.setZero();
    } else {
      p.stratum = 1;
      p.coords[1] = wrapPeriod(coords[1], space.coneAngle());
    }
    break;
  }
  case SpaceKind::QuadrantComplement: {
    requireKind(!(coords[0] < 0.0 && coords[1] < 0.0), "point lies in the removed quadrant");
    const bool corner = coords[0] == 0.0 && coords[1] == 0.0;
    if (stratum == 0) requireKind(corner, "corner stratum needs (0, 0)");
    p.stratum = corner ? 0 : 1;
    if (corner) p.coords.setZero();
    break;
  }
  }
  return p;
}

Point basePoint(const SpaceModel& space) {
  if (space.kind() == SpaceKind::SphereCap) return points::sphere(0.0, 0.0);
  return Point{0, Eigen::VectorXd::Zero(space.coordDim())};
}

bool isSingular(const SpaceModel& space, const Point& p) {
  switch (space.kind()) {
  case SpaceKind::Euclidean:
  case SpaceKind::SphereCap: return false;
  default: return p.stratum == 0;
  }
}

std::string stratumName(const SpaceModel& space, int stratum) {
  switch (space.kind()) {
  case SpaceKind::Euclidean: return "euclidean";
  case SpaceKind::SphereCap: return "sphere";
  case SpaceKind::Spider: return stratum == 0 ? "apex" : "leg" + std::to_string(stratum);
  case SpaceKind::OpenBook: return stratum == 0 ? "spine" : "page" + std::to_string(stratum);
  case SpaceKind::PlanarCone: return stratum == 0 ? "apex" : "cone";
  case SpaceKind::QuadrantComplement: return stratum == 0 ? "corner" : "plane";
  }
  return std::to_string(stratum);
}

int parseStratum(const SpaceModel& space, const std::string& name) {
  auto indexed = [&](const std::string& prefix) -> int {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return -1;
    const std::string digits = name.substr(prefix.size());
    if (!std::all_of(digits.begin(), digits.end(), [](unsigned char ch) { return std::isdigit(ch); })) return -1;
    return std::stoi(digits);
  };
  if (!name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char ch) { return std::isdigit(ch); }))
    return std::stoi(name);
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    if (name == "euclidean") return 0;
    break;
  case SpaceKind::SphereCap:
    if (name == "sphere") return 0;
    break;
  case SpaceKind::Spider:
    if (name == "apex") return 0;
    if (int j = indexed("leg"); j >= 1 && j <= space.pages()) return j;
    break;
  case SpaceKind::OpenBook:
    if (name == "spine") return 0;
    if (int j = indexed("page"); j >= 1 && j <= space.pages()) return j;
    break;
  case SpaceKind::PlanarCone:
    if (name == "apex") return 0;
    if (name == "cone") return 1;
    break;
  case SpaceKind::QuadrantComplement:
    if (name == "corner") return 0;
    if (name == "plane") return 1;
    break;
  }
  throw Error(ErrorCode::ChartMismatch, "unknown stratum '" + name + "' for " + space.describe());
}

namespace points {

Point euclidean(const Eigen::VectorXd& x) { return Point{0, x}; }

Point sphere(double colatitude, double longitude) {
  Eigen::VectorXd c(2);
  c << colatitude, longitude;
  static const SpaceModel model = SpaceModel::sphereCap(1.0);
  return makePoint(model, 0, c);
}

Point apex(const SpaceModel& space) { return basePoint(space); }

Point leg(const SpaceModel& space, int leg, double r) {
  Eigen::VectorXd c(1);
  c << r;
  return makePoint(space, r == 0.0 ? 0 : leg, c);
}

Point page(const SpaceModel& space, int page, double u, const Eigen::VectorXd& v) {
  Eigen::VectorXd c(1 + v.size());
  c << u, v;
  return makePoint(space, u == 0.0 ? 0 : page, c);
}

Point spine(const SpaceModel& space, const Eigen::VectorXd& v) { return page(space, 0, 0.0, v); }

Point cone(const SpaceModel& space, double r, double phi) {
  Eigen::VectorXd c(2);
  c << r, phi;
  return makePoint(space, r == 0.0 ? 0 : 1, c);
}

Point plane(const SpaceModel& space, double x, double y) {
  Eigen::VectorXd c(2);
  c << x, y;
  const int stratum = space.kind() == SpaceKind::Euclidean ? 0 : (x == 0.0 && y == 0.0 ? 0 : 1);
  return makePoint(space, stratum, c);
}

} // namespace points

// --- Geodesic ----------------------------------------------------------------

Geodesic::Geodesic(Point start, Point end, double length, std::function<Point(double)> evaluator)
    : start_(std::move(start)), end_(std::move(end)), length_(length), eval_(std::move(evaluator)) {}

Point Geodesic::operator()(double t) const {
  if (t <= 0.0) return start_;
  if (t >= 1.0) return end_;
  return eval_(t);
}

// --- metric ------------------------------------------------------------------

double distance(const SpaceModel& space, const Point& p, const Point& q) {
  checkPoint(space, p);
  checkPoint(space, q);
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    return (p.coords - q.coords).norm();
  case SpaceKind::SphereCap:
    return sphereDistance(sphereUnit(p), sphereUnit(q));
  case SpaceKind::Spider:
  case SpaceKind::OpenBook:
    return bookDistance(p, q);
  case SpaceKind::PlanarCone: {
    // Larger radius first keeps the formula symmetric to the last bit.
    const double rp = std::max(p.coords[0], q.coords[0]), rq = std::min(p.coords[0], q.coords[0]);
    if (p.stratum == 0 || q.stratum == 0) return rp + rq;
    const double s = coneSeparation(space, p, q);
    if (s >= kPi) return rp + rq;
    return std::hypot(rp - rq * std::cos(s), rq * std::sin(s));
  }
  case SpaceKind::QuadrantComplement:
    if (quadrantVisible(p, q)) return (p.coords - q.coords).norm();
    return p.coords.norm() + q.coords.norm();
  }
  return 0.0;
}

Geodesic geodesic(const SpaceModel& space, const Point& p, const Point& q, const GeodesicOptions& opts) {
  const double length = distance(space, p, q);
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    return Geodesic(p, q, length, [p, q](double t) { return Point{0, (1.0 - t) * p.coords + t * q.coords}; });
  case SpaceKind::SphereCap: {
    GeodesicOptions strict = opts;
    if (length >= kPi - 1e-12 && !opts.tieBreak)
      throw Error(ErrorCode::NonUniqueGeodesic, "antipodal points are joined by many geodesics");
    strict.tieBreak = true;
    const TangentVector v = logMap(space, p, q, strict);
    if (v.isApex) return Geodesic(p, q, 0.0, [p](double) { return p; });
    const Eigen::Vector3d x = sphereUnit(p);
    const auto [f1, f2] = sphereFrame(p);
    const Eigen::Vector3d dir = v.direction[0] * f1 + v.direction[1] * f2;
    return Geodesic(p, q, length, [x, dir, length](double t) {
      return sphereFromUnit(std::cos(t * length) * x + std::sin(t * length) * dir);
    });
  }
  case SpaceKind::Spider:
  case SpaceKind::OpenBook: {
    const Eigen::VectorXd a = unfoldedAgainst(p, q);
    const bool crossing = p.stratum != 0 && q.stratum != 0 && p.stratum != q.stratum;
    return Geodesic(p, q, length, [space, p, q, a, crossing](double t) {
      Eigen::VectorXd z = (1.0 - t) * a + t * q.coords;
      int stratum;
      if (crossing) {
        stratum = z[0] < 0.0 ? p.stratum : q.stratum;
        z[0] = std::abs(z[0]);
      } else {
        stratum = std::max(p.stratum, q.stratum);
        z[0] = std::max(z[0], 0.0);
      }
      return makePoint(space, z[0] == 0.0 ? 0 : stratum, z);
    });
  }
  case SpaceKind::PlanarCone: {
    const double rp = p.coords[0], rq = q.coords[0];
    const bool viaApex = p.stratum == 0 || q.stratum == 0 || coneSeparation(space, p, q) >= kPi;
    if (viaApex) {
      const double phiP = p.coords[1], phiQ = q.coords[1];
      return Geodesic(p, q, length, [space, rp, phiP, phiQ, length](double t) {
        const double travelled = t * length;
        if (travelled <= rp) return points::cone(space, rp - travelled, phiP);
        return points::cone(space, travelled - rp, phiQ);
      });
    }
    const double delta = signedOffset(p.coords[1], q.coords[1], space.coneAngle());
    const Eigen::Vector2d a(rp, 0.0), b(rq * std::cos(delta), rq * std::sin(delta));
    const double phiP = p.coords[1];
    return Geodesic(p, q, length, [space, a, b, phiP](double t) {
      const Eigen::Vector2d z = (1.0 - t) * a + t * b;
      return points::cone(space, z.norm(), phiP + std::atan2(z[1], z[0]));
    });
  }
  case SpaceKind::QuadrantComplement: {
    if (quadrantVisible(p, q)) {
      return Geodesic(p, q, length, [space, p, q](double t) {
        const Eigen::VectorXd z = (1.0 - t) * p.coords + t * q.coords;
        return points::plane(space, z[0], z[1]);
      });
    }
    const double rp = p.coords.norm();
    const Eigen::VectorXd up = p.coords / rp, uq = q.coords / q.coords.norm();
    return Geodesic(p, q, length, [space, rp, up, uq, length](double t) {
      const double travelled = t * length;
      const Eigen::VectorXd z = travelled <= rp ? Eigen::VectorXd((rp - travelled) * up)
                                                : Eigen::VectorXd((travelled - rp) * uq);
      return points::plane(space, z[0], z[1]);
    });
  }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown space");
}

// --- tangent cones -------------------------------------------------------------

TangentCone tangentCone(const SpaceModel& space, const Point& base) {
  checkPoint(space, base);
  switch (space.kind()) {
  case SpaceKind::Euclidean: return TangentCone::linear(space.dimension());
  case SpaceKind::SphereCap: return TangentCone::linear(2);
  case SpaceKind::Spider:
  case SpaceKind::OpenBook:
    if (base.stratum == 0) return TangentCone::book(space.pages(), space.spineDim());
    return TangentCone::linear(1 + space.spineDim());
  case SpaceKind::PlanarCone:
    if (base.stratum == 0) return TangentCone::circle(space.coneAngle());
    return TangentCone::linear(2);
  case SpaceKind::QuadrantComplement:
    if (base.stratum == 0) return TangentCone::sector(-0.5 * kPi, 1.5 * kPi);
    return TangentCone::linear(2);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown space");
}

TangentVector logMap(const SpaceModel& space, const Point& base, const Point& p, const GeodesicOptions& opts) {
  checkPoint(space, base);
  checkPoint(space, p);
  const TangentCone cone = tangentCone(space, base);
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    return cone.make(0, p.coords - base.coords);
  case SpaceKind::SphereCap: {
    const Eigen::Vector3d x = sphereUnit(base), y = sphereUnit(p);
    const double d = sphereDistance(x, y);
    if (d == 0.0) return TangentVector::apex();
    const auto [f1, f2] = sphereFrame(base);
    Eigen::VectorXd c(2);
    if (d >= kPi - 1e-12) {
      if (!opts.tieBreak) throw Error(ErrorCode::CutLocus, "antipodal point has no unique logarithm");
      c << 1.0, 0.0;
    } else {
      const Eigen::Vector3d w = y - x.dot(y) * x;
      c << w.dot(f1), w.dot(f2);
      c.normalize();
    }
    return cone.make(0, d * c);
  }
  case SpaceKind::Spider:
  case SpaceKind::OpenBook: {
    if (base.stratum == 0) {
      Eigen::VectorXd c = p.coords;
      c.tail(space.spineDim()) -= base.coords.tail(space.spineDim());
      return cone.make(p.stratum, c);
    }
    return cone.make(0, unfoldedAgainst(p, base) - base.coords);
  }
  case SpaceKind::PlanarCone: {
    if (base.stratum == 0) return cone.fromLink(p.coords[1], p.coords[0]);
    const double rb = base.coords[0];
    Eigen::VectorXd c(2);
    if (p.stratum == 0) {
      c << -rb, 0.0;
    } else {
      const double delta = signedOffset(base.coords[1], p.coords[1], space.coneAngle());
      const double rq = p.coords[0];
      if (std::abs(delta) < kPi)
        c << rq * std::cos(delta) - rb, rq * std::sin(delta);
      else
        c << -(rb + rq), 0.0;
    }
    return cone.make(0, c);
  }
  case SpaceKind::QuadrantComplement: {
    if (base.stratum == 0) return p.stratum == 0 ? TangentVector::apex() : cone.make(0, p.coords);
    if (quadrantVisible(base, p)) return cone.make(0, p.coords - base.coords);
    const double rb = base.coords.norm();
    return cone.make(0, -(rb + p.coords.norm()) / rb * base.coords);
  }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown space");
}

bool exponentiable(const SpaceModel& space, const Point& base, const TangentVector& v) {
  if (v.isApex) return true;
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    return true;
  case SpaceKind::SphereCap:
    return v.radius <= 0.5 * kPi + 1e-12;
  case SpaceKind::Spider:
  case SpaceKind::OpenBook:
    if (base.stratum == 0) return true;
    return base.coords[0] + v.radius * v.direction[0] >= -1e-12 * (1.0 + base.coords[0]);
  case SpaceKind::PlanarCone: {
    if (base.stratum == 0) return true;
    const double x = base.coords[0] + v.radius * v.direction[0];
    const double y = v.radius * v.direction[1];
    return !(y == 0.0 && x < -1e-12 * (1.0 + base.coords[0]));
  }
  case SpaceKind::QuadrantComplement: {
    if (base.stratum == 0) return true;
    const Eigen::Vector2d p(base.coords[0], base.coords[1]);
    const Eigen::Vector2d step = v.radius * Eigen::Vector2d(v.direction[0], v.direction[1]);
    if (!segmentAvoidsQuadrant(p, step)) return false;
    // A straight step through the corner is not a geodesic continuation: geodesics branch there.
    const double along = -p.dot(step) / step.squaredNorm();
    const double off = std::abs(p[0] * step[1] - p[1] * step[0]) / step.norm();
    return !(along > 1e-12 && along < 1 - 1e-12 && off <= 1e-12 * p.norm());
  }
  }
  return false;
}

double expReach(const SpaceModel& space, const Point& base) {
  switch (space.kind()) {
  case SpaceKind::Euclidean: return kInf;
  case SpaceKind::SphereCap: return 0.5 * kPi;
  case SpaceKind::Spider:
  case SpaceKind::OpenBook:
  case SpaceKind::PlanarCone:
    return base.stratum == 0 ? kInf : base.coords[0];
  case SpaceKind::QuadrantComplement:
    if (base.stratum == 0) return kInf;
    return std::hypot(std::max(base.coords[0], 0.0), std::max(base.coords[1], 0.0));
  }
  return 0.0;
}

Point expMap(const SpaceModel& space, const Point& base, const TangentVector& v) {
  checkPoint(space, base);
  if (v.isApex) return base;
  const TangentCone cone = tangentCone(space, base);
  cone.validate(v);
  if (!exponentiable(space, base, v)) throw Error(ErrorCode::NotExponentiable, "vector leaves the chart");
  const Eigen::VectorXd c = cone.coords(v);
  switch (space.kind()) {
  case SpaceKind::Euclidean:
    return Point{0, base.coords + c};
  case SpaceKind::SphereCap: {
    const Eigen::Vector3d x = sphereUnit(base);
    const auto [f1, f2] = sphereFrame(base);
    const Eigen::Vector3d dir = v.direction[0] * f1 + v.direction[1] * f2;
    return sphereFromUnit(std::cos(v.radius) * x + std::sin(v.radius) * dir);
  }
  case SpaceKind::Spider:
  case SpaceKind::OpenBook: {
    if (base.stratum == 0) {
      Eigen::VectorXd z = c;
      z.tail(space.spineDim()) += base.coords.tail(space.spineDim());
      return makePoint(space, z[0] > 0.0 ? v.chart : 0, z);
    }
    Eigen::VectorXd z = base.coords + c;
    if (z[0] <= 0.0) {
      z[0] = 0.0;
      return makePoint(space, 0, z);
    }
    return makePoint(space, base.stratum, z);
  }
  case SpaceKind::PlanarCone: {
    if (base.stratum == 0) return points::cone(space, v.radius, cone.linkCoordinate(v));
    const double x = base.coords[0] + c[0], y = c[1];
    if (x <= 0.0 && y == 0.0) return points::apex(space);
    return points::cone(space, std::hypot(x, y), base.coords[1] + std::atan2(y, x));
  }
  case SpaceKind::QuadrantComplement: {
    const Eigen::VectorXd z = base.coords + c;
    const double x = (z[0] < 0.0 && z[1] < 0.0 && z[0] > -1e-14) ? 0.0 : z[0];
    const double y = (z[0] < 0.0 && z[1] < 0.0 && z[1] > -1e-14) ? 0.0 : z[1];
    return points::plane(space, x, y);
  }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown space");
}

double angle(const SpaceModel& space, const Point& base, const TangentVector& v, const TangentVector& w) {
  return tangentCone(space, base).angle(v, w);
}

double inner(const SpaceModel& space, const Point& base, const TangentVector& v, const TangentVector& w) {
  return tangentCone(space, base).inner(v, w);
}

double coneDistance(const SpaceModel& space, const Point& base, const TangentVector& v, const TangentVector& w) {
  return tangentCone(space, base).distance(v, w);
}

} // namespace stratmean
