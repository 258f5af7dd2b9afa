#include "stratmean/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/quadrature/gauss.hpp>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

struct PointLess {
  bool operator()(const Point& a, const Point& b) const {
    if (a.stratum != b.stratum) return a.stratum < b.stratum;
    return std::lexicographical_compare(a.coords.data(), a.coords.data() + a.coords.size(), b.coords.data(),
                                        b.coords.data() + b.coords.size());
  }
};

// Gauss-Legendre nodes on [-1, 1].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <int N>
Quadrature legendre() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  Quadrature q;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] == 0.0) continue;
    q.nodes.push_back(-a[i]);
    q.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    q.nodes.push_back(a[i]);
    q.weights.push_back(w[i]);
  }
  return q;
}

const Quadrature& quadrature(int nodes) {
  static const Quadrature q512 = legendre<512>();
  static const Quadrature q64 = legendre<64>();
  static const Quadrature q16 = legendre<16>();
  if (nodes == 512) return q512;
  if (nodes == 64) return q64;
  if (nodes == 16) return q16;
  throw Error(ErrorCode::InvalidArgument, "supported quadrature sizes are 16, 64 and 512");
}

} // namespace

Point Segment::pointAt(const SpaceModel& space, double s) const {
  Eigen::VectorXd c = coords;
  c[0] = s;
  int st = stratum;
  if ((space.isBookLike() || space.kind() == SpaceKind::PlanarCone) && s == 0.0) st = 0;
  return makePoint(space, st, c);
}

Measure::Measure(std::vector<Atom> atoms, std::vector<Segment> segments)
    : atoms_(std::move(atoms)), segments_(std::move(segments)) {
  for (const auto& a : atoms_) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw Error(ErrorCode::InvalidArgument, "atom weights must be positive");
    mass_ += a.weight;
  }
  for (const auto& s : segments_) {
    if (!(s.hi > s.lo) || !(s.density > 0.0)) throw Error(ErrorCode::InvalidArgument, "segments need lo < hi and positive density");
    mass_ += s.mass();
  }
}

std::vector<Atom> Measure::discretized(const SpaceModel& space, int nodes) const {
  std::vector<Atom> out = atoms_;
  if (segments_.empty()) return out;
  const Quadrature& q = quadrature(nodes);
  for (const auto& s : segments_) {
    const double half = 0.5 * (s.hi - s.lo), mid = 0.5 * (s.hi + s.lo);
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      out.push_back({s.pointAt(space, mid + half * q.nodes[i]), s.density * half * q.weights[i]});
  }
  return out;
}

Measure Measure::normalized() const {
  if (!(mass_ > 0.0)) throw Error(ErrorCode::EmptyMeasure, "cannot normalize an empty measure");
  return scaled(1.0 / mass_);
}

Measure Measure::plus(const Measure& other) const {
  std::vector<Atom> a = atoms_;
  a.insert(a.end(), other.atoms_.begin(), other.atoms_.end());
  std::vector<Segment> s = segments_;
  s.insert(s.end(), other.segments_.begin(), other.segments_.end());
  return Measure(std::move(a), std::move(s));
}

Measure Measure::scaled(double t) const {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "measure scale must be positive");
  std::vector<Atom> a = atoms_;
  for (auto& x : a) x.weight *= t;
  std::vector<Segment> s = segments_;
  for (auto& x : s) x.density *= t;
  return Measure(std::move(a), std::move(s));
}

void Measure::validate(const SpaceModel& space) const {
  if (empty()) throw Error(ErrorCode::EmptyMeasure, "measure has no mass");
  for (const auto& a : atoms_) {
    const Point p = makePoint(space, a.point.stratum, a.point.coords);
    if (!(p == a.point)) throw Error(ErrorCode::ChartMismatch, "atom is not in canonical chart form");
  }
  for (const auto& s : segments_) {
    if (s.coords.size() != space.coordDim()) throw Error(ErrorCode::ChartMismatch, "segment template has wrong length");
    (void)s.pointAt(space, s.lo);
    (void)s.pointAt(space, s.hi);
  }
}

Measure dirac(const Point& p, double weight) { return Measure({{p, weight}}); }

TangentMeasure::TangentMeasure(std::vector<TangentAtom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_)
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw Error(ErrorCode::InvalidArgument, "tangent weights must be positive");
}

double TangentMeasure::totalMass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  return m;
}

void TangentMeasure::add(const TangentVector& v, double weight) {
  if (!(weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "tangent weights must be positive");
  atoms_.push_back({v, weight});
}

double pair(const TangentCone& cone, const TangentMeasure& delta, const TangentVector& x) {
  double s = 0.0;
  for (const auto& a : delta.atoms()) s += a.weight * cone.inner(a.vector, x);
  return s;
}

double pair(const SpaceModel& space, const Point& base, const TangentMeasure& delta, const TangentVector& x) {
  return pair(tangentCone(space, base), delta, x);
}

TangentMeasure scaleVectors(const TangentCone& cone, const TangentMeasure& delta, double r) {
  if (r < 0.0) throw Error(ErrorCode::InvalidArgument, "negative vector scale");
  std::vector<TangentAtom> out;
  out.reserve(delta.size());
  for (const auto& a : delta.atoms()) out.push_back({cone.scaled(a.vector, r), a.weight});
  return TangentMeasure(std::move(out));
}

TangentMeasure scaleMass(const TangentMeasure& delta, double t) {
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "negative mass scale");
  if (t == 0.0) return {};
  std::vector<TangentAtom> out = delta.atoms();
  for (auto& a : out) a.weight *= t;
  return TangentMeasure(std::move(out));
}

TangentMeasure pushforwardLog(const SpaceModel& space, const Point& base, const Measure& m,
                              const GeodesicOptions& opts, int quadratureNodes) {
  std::vector<TangentAtom> out;
  for (const auto& a : m.discretized(space, quadratureNodes)) out.push_back({logMap(space, base, a.point, opts), a.weight});
  return TangentMeasure(std::move(out));
}

std::vector<Point> sample(const SpaceModel& space, const Measure& m, RngStream& rng, std::size_t n) {
  if (m.empty()) throw Error(ErrorCode::EmptyMeasure, "cannot sample an empty measure");
  const auto& atoms = m.atoms();
  const auto& segs = m.segments();
  std::vector<double> cumulative;
  cumulative.reserve(atoms.size() + segs.size());
  double acc = 0.0;
  for (const auto& a : atoms) cumulative.push_back(acc += a.weight);
  for (const auto& s : segs) cumulative.push_back(acc += s.mass());
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    std::size_t k = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
    if (k >= cumulative.size()) k = cumulative.size() - 1;
    if (k < atoms.size()) {
      out.push_back(atoms[k].point);
    } else {
      const Segment& s = segs[k - atoms.size()];
      out.push_back(s.pointAt(space, s.lo + rng.uniform() * (s.hi - s.lo)));
    }
  }
  return out;
}

Measure empiricalMeasure(const std::vector<Point>& pts) {
  if (pts.empty()) throw Error(ErrorCode::EmptyMeasure, "no sample points");
  std::map<Point, std::size_t, PointLess> counts;
  for (const auto& p : pts) ++counts[p];
  std::vector<Atom> atoms;
  atoms.reserve(counts.size());
  const double n = static_cast<double>(pts.size());
  for (const auto& [p, c] : counts) atoms.push_back({p, static_cast<double>(c) / n});
  return Measure(std::move(atoms));
}

} // namespace stratmean
