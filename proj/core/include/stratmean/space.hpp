#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "stratmean/tangent_cone.hpp"

namespace stratmean {

enum class SpaceKind { Euclidean, SphereCap, Spider, OpenBook, PlanarCone, QuadrantComplement };

class SpaceModel {
public:
  SpaceModel() = default;

  static SpaceModel euclidean(int dim);
  static SpaceModel sphereCap(double supportRadius);
  static SpaceModel spider(int legs);
  static SpaceModel openBook(int pages, int spineDim);
  static SpaceModel planarCone(double totalAngle);
  static SpaceModel quadrantComplement();

  SpaceKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dim_; }
  int pages() const noexcept { return pages_; }
  int spineDim() const noexcept { return spine_; }
  double coneAngle() const noexcept { return angle_; }
  double supportRadius() const noexcept { return radius_; }

  // Length of Point::coords.
  int coordDim() const noexcept;
  bool isBookLike() const noexcept { return kind_ == SpaceKind::Spider || kind_ == SpaceKind::OpenBook; }
  bool isFlat() const noexcept { return kind_ != SpaceKind::SphereCap; }
  bool isCat0() const noexcept;
  // The quadrant complement is only used for section/distortion demos.
  bool isDemo() const noexcept { return kind_ == SpaceKind::QuadrantComplement; }
  std::string describe() const;

  bool operator==(const SpaceModel& other) const = default;

private:
  SpaceKind kind_ = SpaceKind::Euclidean;
  int dim_ = 1;
  int pages_ = 0;
  int spine_ = 0;
  double angle_ = 0.0;
  double radius_ = 0.0;
};

// Stratum 0 is always the distinguished (singular or base) chart:
//   Euclidean: 0, coords in R^d
//   SphereCap: 0, coords (colatitude, longitude)
//   Spider/OpenBook: 0 = apex/spine with coords (0, v); j = page j with coords (u > 0, v)
//   PlanarCone: 0 = apex (0, 0); 1 = (r > 0, phi in [0, angle))
//   QuadrantComplement: 0 = corner (0, 0); 1 = (x, y) outside the open third quadrant
struct Point {
  int stratum = 0;
  Eigen::VectorXd coords;
};

bool operator==(const Point& a, const Point& b);

// Validates and canonicalizes; throws ChartMismatch for coordinates outside the chart.
Point makePoint(const SpaceModel& space, int stratum, const Eigen::VectorXd& coords);
Point basePoint(const SpaceModel& space);
bool isSingular(const SpaceModel& space, const Point& p);

std::string stratumName(const SpaceModel& space, int stratum);
int parseStratum(const SpaceModel& space, const std::string& name);

struct GeodesicOptions {
  // Resolve non-unique geodesics to the lowest chart instead of raising.
  bool tieBreak = false;
};

class Geodesic {
public:
  Geodesic(Point start, Point end, double length, std::function<Point(double)> evaluator);

  const Point& start() const noexcept { return start_; }
  const Point& end() const noexcept { return end_; }
  double length() const noexcept { return length_; }
  Point operator()(double t) const;

private:
  Point start_;
  Point end_;
  double length_;
  std::function<Point(double)> eval_;
};

double distance(const SpaceModel& space, const Point& p, const Point& q);
Geodesic geodesic(const SpaceModel& space, const Point& p, const Point& q, const GeodesicOptions& opts = {});

TangentCone tangentCone(const SpaceModel& space, const Point& base);
TangentVector logMap(const SpaceModel& space, const Point& base, const Point& p, const GeodesicOptions& opts = {});
Point expMap(const SpaceModel& space, const Point& base, const TangentVector& v);
bool exponentiable(const SpaceModel& space, const Point& base, const TangentVector& v);
// Largest radius exponentiable in every direction (infinite on the flat models away from obstructions).
double expReach(const SpaceModel& space, const Point& base);

double angle(const SpaceModel& space, const Point& base, const TangentVector& v, const TangentVector& w);
double inner(const SpaceModel& space, const Point& base, const TangentVector& v, const TangentVector& w);
double coneDistance(const SpaceModel& space, const Point& base, const TangentVector& v, const TangentVector& w);

namespace points {
Point euclidean(const Eigen::VectorXd& x);
Point sphere(double colatitude, double longitude);
Point apex(const SpaceModel& space);
Point leg(const SpaceModel& space, int leg, double r);
Point page(const SpaceModel& space, int page, double u, const Eigen::VectorXd& v);
Point spine(const SpaceModel& space, const Eigen::VectorXd& v);
Point cone(const SpaceModel& space, double r, double phi);
Point plane(const SpaceModel& space, double x, double y);
} // namespace points

} // namespace stratmean
