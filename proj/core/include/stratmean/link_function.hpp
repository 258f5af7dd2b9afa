#pragma once

#include <vector>

#include "stratmean/measure.hpp"
#include "stratmean/tangent_cone.hpp"

namespace stratmean {

// phi -> pair(delta, unit vector at link coordinate phi) on a circle or sector link.
// Between consecutive breakpoints (atom directions +- pi) it is exactly A cos + B sin + C.
class LinkFunction {
public:
  struct Piece {
    double lo, hi;
    double a, b, c;
  };

  struct Extremum {
    double phi;
    double value;
  };

  LinkFunction(const TangentCone& cone, const TangentMeasure& delta);

  double operator()(double phi) const;
  // Maximum over [lo, hi] with 0 <= lo <= hi <= linkLength; ties go to the smallest phi.
  Extremum maxOn(double lo, double hi) const;
  Extremum minOn(double lo, double hi) const;
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  double scale() const noexcept { return scale_; }
  double linkLength() const noexcept { return length_; }

private:
  Extremum extremum(double lo, double hi, double sign) const;

  TangentCone cone_;
  std::vector<double> phis_;
  std::vector<double> weights_; // weight * radius
  std::vector<Piece> pieces_;
  double length_ = 0.0;
  double scale_ = 0.0;
};

} // namespace stratmean
