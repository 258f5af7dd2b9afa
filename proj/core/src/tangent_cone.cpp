#include "stratmean/tangent_cone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

// Angle between two unit vectors without the acos blow-up near 0 and pi.
double unitAngle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

} // namespace

bool operator==(const TangentVector& a, const TangentVector& b) {
  if (a.isApex || b.isApex) return a.isApex == b.isApex;
  return a.chart == b.chart && a.radius == b.radius && a.direction == b.direction;
}

TangentCone TangentCone::linear(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "linear cone needs dimension >= 1");
  TangentCone c;
  c.kind_ = ConeKind::Linear;
  c.dim_ = dim;
  return c;
}

TangentCone TangentCone::book(int pages, int spineDim) {
  if (pages < 1 || spineDim < 0) throw Error(ErrorCode::InvalidArgument, "bad book cone");
  TangentCone c;
  c.kind_ = ConeKind::Book;
  c.pages_ = pages;
  c.spine_ = spineDim;
  c.dim_ = 1 + spineDim;
  return c;
}

TangentCone TangentCone::circle(double linkLength) {
  if (!(linkLength >= kTwoPi - 1e-12))
    throw Error(ErrorCode::InvalidArgument, "circle cone needs link length >= 2pi");
  TangentCone c;
  c.kind_ = ConeKind::Circle;
  c.dim_ = 2;
  c.link_ = linkLength;
  return c;
}

TangentCone TangentCone::sector(double startAngle, double span) {
  if (!(span > 0.0 && span < kTwoPi)) throw Error(ErrorCode::InvalidArgument, "sector span must lie in (0, 2pi)");
  TangentCone c;
  c.kind_ = ConeKind::Sector;
  c.dim_ = 2;
  c.link_ = span;
  c.start_ = startAngle;
  return c;
}

int TangentCone::ambientDim() const noexcept { return dim_; }

TangentVector TangentCone::make(int chart, const Eigen::VectorXd& coords) const {
  if (coords.size() != dim_) throw Error(ErrorCode::ChartMismatch, "tangent coordinates have wrong length");
  if (!coords.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite tangent coordinates");
  const double n = coords.norm();
  if (n == 0.0) return TangentVector::apex();
  TangentVector v;
  v.isApex = false;
  v.radius = n;
  switch (kind_) {
  case ConeKind::Linear:
    v.chart = 0;
    v.direction = coords / n;
    break;
  case ConeKind::Book: {
    if (chart < 0 || chart > pages_) throw Error(ErrorCode::ChartMismatch, "page index out of range");
    Eigen::VectorXd c = coords;
    if (chart == 0 || c[0] <= 0.0) {
      if (c[0] < -1e-12 * n) throw Error(ErrorCode::InvalidArgument, "page coordinate u must be >= 0");
      if (chart == 0 && c[0] > 1e-12 * n) throw Error(ErrorCode::ChartMismatch, "spine vector with u > 0");
      c[0] = 0.0;
      const double m = c.norm();
      if (m == 0.0) return TangentVector::apex();
      v.chart = 0;
      v.radius = m;
      v.direction = c / m;
    } else {
      v.chart = chart;
      v.direction = c / n;
    }
    break;
  }
  case ConeKind::Circle: {
    const double a = wrap(std::atan2(coords[1], coords[0]), kTwoPi);
    return fromLink(kTwoPi * chart + a, n);
  }
  case ConeKind::Sector: {
    TangentVector probe;
    probe.isApex = false;
    probe.direction = coords / n;
    probe.radius = 1.0;
    return fromLink(linkCoordinate(probe), n);
  }
  }
  return v;
}

Eigen::VectorXd TangentCone::coords(const TangentVector& v) const {
  if (v.isApex) return Eigen::VectorXd::Zero(dim_);
  return v.radius * v.direction;
}

TangentVector TangentCone::scaled(const TangentVector& v, double r) const {
  if (r < 0.0) throw Error(ErrorCode::InvalidArgument, "negative scale");
  if (v.isApex || r == 0.0) return TangentVector::apex();
  TangentVector out = v;
  out.radius = v.radius * r;
  return out;
}

TangentVector TangentCone::unit(const TangentVector& v) const {
  if (v.isApex) throw Error(ErrorCode::ApexVector, "apex has no direction");
  TangentVector out = v;
  out.radius = 1.0;
  return out;
}

void TangentCone::validate(const TangentVector& v) const {
  if (v.isApex) {
    if (v.radius != 0.0) throw Error(ErrorCode::InvalidArgument, "apex must have radius 0");
    return;
  }
  if (!(v.radius > 0.0) || !std::isfinite(v.radius))
    throw Error(ErrorCode::InvalidArgument, "non-apex vector needs a positive radius");
  if (v.direction.size() != dim_) throw Error(ErrorCode::ChartMismatch, "direction has wrong length");
  if (std::abs(v.direction.norm() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "direction is not unit");
  switch (kind_) {
  case ConeKind::Linear:
    if (v.chart != 0) throw Error(ErrorCode::ChartMismatch, "linear cone has chart 0 only");
    break;
  case ConeKind::Book:
    if (v.chart < 0 || v.chart > pages_) throw Error(ErrorCode::ChartMismatch, "page index out of range");
    if (v.chart == 0 && v.direction[0] != 0.0) throw Error(ErrorCode::ChartMismatch, "spine vector with u != 0");
    if (v.chart > 0 && !(v.direction[0] > 0.0)) throw Error(ErrorCode::ChartMismatch, "page vector needs u > 0");
    break;
  case ConeKind::Circle: {
    const int sheets = static_cast<int>(std::ceil(link_ / kTwoPi - 1e-12));
    if (v.chart < 0 || v.chart >= sheets) throw Error(ErrorCode::ChartMismatch, "sheet index out of range");
    break;
  }
  case ConeKind::Sector:
    (void)linkCoordinate(v);
    break;
  }
}

double TangentCone::linkCoordinate(const TangentVector& v) const {
  if (v.isApex) throw Error(ErrorCode::ApexVector, "apex has no link coordinate");
  const double a = std::atan2(v.direction[1], v.direction[0]);
  if (kind_ == ConeKind::Circle) {
    const double phi = kTwoPi * v.chart + wrap(a, kTwoPi);
    return phi >= link_ ? wrap(phi, link_) : phi;
  }
  if (kind_ == ConeKind::Sector) {
    double phi = a - start_;
    while (phi < -1e-12) phi += kTwoPi;
    while (phi >= kTwoPi) phi -= kTwoPi;
    if (phi < 0.0) phi = 0.0;
    if (phi > link_ + 1e-9) throw Error(ErrorCode::ChartMismatch, "direction outside the sector");
    return std::min(phi, link_);
  }
  throw Error(ErrorCode::InvalidArgument, "link coordinates exist only on one-dimensional links");
}

TangentVector TangentCone::fromLink(double phi, double radius) const {
  if (radius < 0.0) throw Error(ErrorCode::InvalidArgument, "negative radius");
  if (radius == 0.0) return TangentVector::apex();
  TangentVector v;
  v.isApex = false;
  v.radius = radius;
  v.direction.resize(2);
  if (kind_ == ConeKind::Circle) {
    const double p = wrap(phi, link_);
    int sheet = static_cast<int>(std::floor(p / kTwoPi));
    double a = p - kTwoPi * sheet;
    v.chart = sheet;
    v.direction << std::cos(a), std::sin(a);
  } else if (kind_ == ConeKind::Sector) {
    if (phi < -1e-9 || phi > link_ + 1e-9) throw Error(ErrorCode::ChartMismatch, "link coordinate outside the sector");
    const double a = start_ + std::clamp(phi, 0.0, link_);
    v.chart = 0;
    v.direction << std::cos(a), std::sin(a);
  } else {
    throw Error(ErrorCode::InvalidArgument, "link coordinates exist only on one-dimensional links");
  }
  return v;
}

double TangentCone::linkSeparation(double a, double b) const {
  if (kind_ == ConeKind::Circle) {
    const double d = wrap(a - b, link_);
    return std::min(d, link_ - d);
  }
  return std::abs(a - b);
}

double TangentCone::angle(const TangentVector& v, const TangentVector& w) const {
  if (v.isApex || w.isApex) throw Error(ErrorCode::ApexVector, "angle with the apex is undefined");
  switch (kind_) {
  case ConeKind::Linear:
    return unitAngle(v.direction, w.direction);
  case ConeKind::Book: {
    const bool sameSide = v.chart == w.chart || v.chart == 0 || w.chart == 0;
    if (sameSide) return unitAngle(v.direction, w.direction);
    Eigen::VectorXd unfolded = v.direction;
    unfolded[0] = -unfolded[0];
    return unitAngle(unfolded, w.direction);
  }
  case ConeKind::Circle:
  case ConeKind::Sector:
    return std::min(linkSeparation(linkCoordinate(v), linkCoordinate(w)), std::numbers::pi);
  }
  return 0.0;
}

double TangentCone::inner(const TangentVector& v, const TangentVector& w) const {
  if (v.isApex || w.isApex) return 0.0;
  switch (kind_) {
  case ConeKind::Linear:
    return v.radius * w.radius * v.direction.dot(w.direction);
  case ConeKind::Book: {
    const bool sameSide = v.chart == w.chart || v.chart == 0 || w.chart == 0;
    double c = v.direction.dot(w.direction);
    if (!sameSide) c -= 2.0 * v.direction[0] * w.direction[0];
    return v.radius * w.radius * c;
  }
  case ConeKind::Circle:
  case ConeKind::Sector:
    return v.radius * w.radius * std::cos(angle(v, w));
  }
  return 0.0;
}

double TangentCone::distance(const TangentVector& v, const TangentVector& w) const {
  if (v.isApex) return w.isApex ? 0.0 : w.radius;
  if (w.isApex) return v.radius;
  switch (kind_) {
  case ConeKind::Linear:
    return (v.radius * v.direction - w.radius * w.direction).norm();
  case ConeKind::Book: {
    const bool sameSide = v.chart == w.chart || v.chart == 0 || w.chart == 0;
    Eigen::VectorXd a = v.radius * v.direction;
    if (!sameSide) a[0] = -a[0];
    return (a - w.radius * w.direction).norm();
  }
  case ConeKind::Circle:
  case ConeKind::Sector: {
    const double s = linkSeparation(linkCoordinate(v), linkCoordinate(w));
    if (s >= std::numbers::pi) return v.radius + w.radius;
    const double dx = v.radius - w.radius * std::cos(s);
    const double dy = w.radius * std::sin(s);
    return std::hypot(dx, dy);
  }
  }
  return 0.0;
}

TangentVector TangentCone::randomUnit(RngStream& rng) const {
  switch (kind_) {
  case ConeKind::Linear: {
    Eigen::VectorXd x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = rng.normal();
    if (x.norm() == 0.0) x[0] = 1.0;
    return make(0, x / x.norm());
  }
  case ConeKind::Book: {
    const int choices = pages_ + (spine_ > 0 ? 1 : 0);
    int pick = static_cast<int>(rng.uniform() * choices);
    if (pick >= choices) pick = choices - 1;
    const int chart = spine_ > 0 ? pick : pick + 1;
    Eigen::VectorXd x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = rng.normal();
    x[0] = chart == 0 ? 0.0 : std::abs(x[0]) + 1e-3;
    return make(chart, x / x.norm());
  }
  case ConeKind::Circle:
  case ConeKind::Sector:
    return fromLink(rng.uniform() * link_, 1.0);
  }
  return TangentVector::apex();
}

} // namespace stratmean
