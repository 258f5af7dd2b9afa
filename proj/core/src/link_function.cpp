#include "stratmean/link_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrapPeriod(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}
} // namespace

LinkFunction::LinkFunction(const TangentCone& cone, const TangentMeasure& delta) : cone_(cone) {
  if (cone.kind() != ConeKind::Circle && cone.kind() != ConeKind::Sector)
    throw Error(ErrorCode::InvalidArgument, "link functions need a one-dimensional link");
  length_ = cone.linkLength();
  const bool circular = cone.kind() == ConeKind::Circle;
  std::vector<double> breaks{0.0, length_};
  for (const auto& atom : delta.atoms()) {
    if (atom.vector.isApex) continue;
    const double phi = cone.linkCoordinate(atom.vector);
    phis_.push_back(phi);
    weights_.push_back(atom.weight * atom.vector.radius);
    scale_ += atom.weight * atom.vector.radius;
    for (double s : {-kPi, kPi}) {
      double b = phi + s;
      if (circular) b = wrapPeriod(b, length_);
      if (b > 0.0 && b < length_) breaks.push_back(b);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    Piece piece{breaks[k], breaks[k + 1], 0.0, 0.0, 0.0};
    const double mid = 0.5 * (piece.lo + piece.hi);
    for (std::size_t i = 0; i < phis_.size(); ++i) {
      double offset = mid - phis_[i];
      if (circular) {
        offset = wrapPeriod(offset, length_);
        if (offset > 0.5 * length_) offset -= length_;
      }
      if (std::abs(offset) < kPi) {
        const double psi = mid - offset;
        piece.a += weights_[i] * std::cos(psi);
        piece.b += weights_[i] * std::sin(psi);
      } else {
        piece.c -= weights_[i];
      }
    }
    pieces_.push_back(piece);
  }
}

double LinkFunction::operator()(double phi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < phis_.size(); ++i)
    s += weights_[i] * std::cos(std::min(cone_.linkSeparation(phi, phis_[i]), kPi));
  return s;
}

LinkFunction::Extremum LinkFunction::extremum(double lo, double hi, double sign) const {
  Extremum best{lo, sign * (*this)(lo)};
  auto consider = [&](double phi) {
    phi = std::clamp(phi, lo, hi);
    const double v = sign * (*this)(phi);
    const double slack = 4e-16 * (scale_ + std::abs(v));
    if (v > best.value + slack || (std::abs(v - best.value) <= slack && phi < best.phi)) best = {phi, v};
  };
  consider(hi);
  for (const auto& p : pieces_) {
    const double a = std::max(lo, p.lo), b = std::min(hi, p.hi);
    if (a > b) continue;
    consider(a);
    consider(b);
    const double amp = std::hypot(p.a, p.b);
    if (amp == 0.0) continue;
    // Stationary points of A cos + B sin: theta0 (max) and theta0 + pi (min), modulo 2pi.
    const double theta0 = std::atan2(p.b, p.a) + (sign > 0.0 ? 0.0 : kPi);
    double first = theta0 + kTwoPi * std::ceil((a - theta0) / kTwoPi);
    for (double t = first; t <= b; t += kTwoPi) consider(t);
  }
  best.value *= sign;
  return best;
}

LinkFunction::Extremum LinkFunction::maxOn(double lo, double hi) const { return extremum(lo, hi, 1.0); }

LinkFunction::Extremum LinkFunction::minOn(double lo, double hi) const { return extremum(lo, hi, -1.0); }

} // namespace stratmean
