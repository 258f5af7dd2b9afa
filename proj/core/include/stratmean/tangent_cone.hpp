#pragma once

#include <Eigen/Dense>

#include "stratmean/rng.hpp"

namespace stratmean {

// Polar form of a tangent vector. The apex is canonical: chart 0, empty direction, radius 0.
struct TangentVector {
  bool isApex = true;
  int chart = 0;
  Eigen::VectorXd direction;
  double radius = 0.0;

  static TangentVector apex() { return {}; }
};

bool operator==(const TangentVector& a, const TangentVector& b);

enum class ConeKind {
  Linear, // R^n, chart 0
  Book,   // k half-spaces glued along R^p; chart 0 is the spine, chart j the j-th page
  Circle, // flat cone over a circle of length >= 2pi; chart = sheet index
  Sector, // flat cone over an arc of length < 2pi
};

class TangentCone {
public:
  TangentCone() = default;

  static TangentCone linear(int dim);
  static TangentCone book(int pages, int spineDim);
  static TangentCone circle(double linkLength);
  static TangentCone sector(double startAngle, double span);

  ConeKind kind() const noexcept { return kind_; }
  // Length of direction tuples.
  int ambientDim() const noexcept;
  int pages() const noexcept { return pages_; }
  int spineDim() const noexcept { return spine_; }
  double linkLength() const noexcept { return link_; }
  double sectorStart() const noexcept { return start_; }
  bool isLinear() const noexcept { return kind_ == ConeKind::Linear; }

  // Build from chart coordinates (radius times direction). Zero coordinates give the apex.
  TangentVector make(int chart, const Eigen::VectorXd& coords) const;
  Eigen::VectorXd coords(const TangentVector& v) const;

  TangentVector scaled(const TangentVector& v, double r) const;
  TangentVector unit(const TangentVector& v) const;
  void validate(const TangentVector& v) const;

  double angle(const TangentVector& v, const TangentVector& w) const;
  double inner(const TangentVector& v, const TangentVector& w) const;
  double distance(const TangentVector& v, const TangentVector& w) const;

  // One-dimensional links (Circle, Sector): phi in [0, linkLength).
  double linkCoordinate(const TangentVector& v) const;
  TangentVector fromLink(double phi, double radius) const;
  double linkSeparation(double a, double b) const;

  TangentVector randomUnit(RngStream& rng) const;

  bool operator==(const TangentCone& other) const = default;

private:
  ConeKind kind_ = ConeKind::Linear;
  int dim_ = 1;
  int pages_ = 0;
  int spine_ = 0;
  double link_ = 0.0;
  double start_ = 0.0;
};

} // namespace stratmean
