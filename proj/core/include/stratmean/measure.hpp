#pragma once

#include <vector>

#include "stratmean/rng.hpp"
#include "stratmean/space.hpp"
#include "stratmean/tangent_cone.hpp"

namespace stratmean {

struct Atom {
  Point point;
  double weight = 0.0;
};

// Uniform mass along the first chart coordinate, which is arc length in every built-in chart.
// The remaining coordinates are taken from `coords`.
struct Segment {
  int stratum = 0;
  Eigen::VectorXd coords;
  double lo = 0.0;
  double hi = 0.0;
  double density = 0.0;

  double mass() const { return density * (hi - lo); }
  Point pointAt(const SpaceModel& space, double s) const;
};

class Measure {
public:
  Measure() = default;
  explicit Measure(std::vector<Atom> atoms, std::vector<Segment> segments = {});

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  double totalMass() const noexcept { return mass_; }
  bool empty() const noexcept { return atoms_.empty() && segments_.empty(); }

  // Atoms plus Gauss-Legendre nodes standing in for the segments.
  std::vector<Atom> discretized(const SpaceModel& space, int nodes = 512) const;

  Measure normalized() const;
  Measure plus(const Measure& other) const;
  Measure scaled(double t) const;
  void validate(const SpaceModel& space) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Segment> segments_;
  double mass_ = 0.0;
};

Measure dirac(const Point& p, double weight = 1.0);

struct TangentAtom {
  TangentVector vector;
  double weight = 0.0;
};

class TangentMeasure {
public:
  TangentMeasure() = default;
  explicit TangentMeasure(std::vector<TangentAtom> atoms);

  const std::vector<TangentAtom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  double totalMass() const;
  void add(const TangentVector& v, double weight);

private:
  std::vector<TangentAtom> atoms_;
};

double pair(const TangentCone& cone, const TangentMeasure& delta, const TangentVector& x);
double pair(const SpaceModel& space, const Point& base, const TangentMeasure& delta, const TangentVector& x);
TangentMeasure scaleVectors(const TangentCone& cone, const TangentMeasure& delta, double r);
TangentMeasure scaleMass(const TangentMeasure& delta, double t);

TangentMeasure pushforwardLog(const SpaceModel& space, const Point& base, const Measure& m,
                              const GeodesicOptions& opts = {}, int quadratureNodes = 512);

std::vector<Point> sample(const SpaceModel& space, const Measure& m, RngStream& rng, std::size_t n);

// Merges coincident points, so a sample of n draws from k atoms becomes at most k atoms.
Measure empiricalMeasure(const std::vector<Point>& pts);

} // namespace stratmean
