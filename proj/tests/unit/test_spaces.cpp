#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "stratmean/errors.hpp"
#include "stratmean/space.hpp"
#include "test_support.hpp"

using namespace stratmean;
using namespace stratmean::testing;

namespace {

Point randomPoint(const SpaceModel& s, RngStream& rng) {
  switch (s.kind()) {
  case SpaceKind::Euclidean: {
    Eigen::VectorXd x(s.dimension());
    for (int i = 0; i < s.dimension(); ++i) x[i] = 2.0 * rng.normal();
    return points::euclidean(x);
  }
  case SpaceKind::SphereCap:
    return points::sphere(s.supportRadius() * std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
  case SpaceKind::Spider:
  case SpaceKind::OpenBook: {
    Eigen::VectorXd v(s.spineDim());
    for (int i = 0; i < s.spineDim(); ++i) v[i] = rng.normal();
    const double u = 2.0 * rng.uniform();
    const int page = 1 + static_cast<int>(rng.uniform() * s.pages());
    if (rng.uniform() < 0.1) return s.spineDim() == 0 ? points::apex(s) : points::spine(s, v);
    return points::page(s, page, u, v);
  }
  case SpaceKind::PlanarCone:
    if (rng.uniform() < 0.05) return points::apex(s);
    return points::cone(s, 2.0 * rng.uniform(), s.coneAngle() * rng.uniform());
  case SpaceKind::QuadrantComplement:
    for (;;) {
      const double x = 4.0 * rng.uniform() - 2.0, y = 4.0 * rng.uniform() - 2.0;
      if (x < 0.0 && y < 0.0) continue;
      return points::plane(s, x, y);
    }
  }
  return basePoint(s);
}

std::vector<SpaceModel> allSpaces() {
  return {SpaceModel::euclidean(1),  SpaceModel::euclidean(3),     SpaceModel::sphereCap(0.4),
          SpaceModel::spider(3),     SpaceModel::spider(5),        SpaceModel::openBook(3, 1),
          SpaceModel::openBook(4, 2), SpaceModel::planarCone(3 * kPi), SpaceModel::planarCone(2 * kPi),
          SpaceModel::quadrantComplement()};
}

} // namespace

TEST(Distance, SpiderLegsMeetThroughApex) {
  const auto s = SpaceModel::spider(3);
  EXPECT_DOUBLE_EQ(distance(s, points::leg(s, 1, 1.0), points::leg(s, 2, 2.0)), 3.0);
}

TEST(Distance, EuclideanPythagoras) {
  const auto s = SpaceModel::euclidean(2);
  EXPECT_DOUBLE_EQ(distance(s, points::euclidean(vec({0, 0})), points::euclidean(vec({3, 4}))), 5.0);
}

TEST(Distance, PlanarConeWideGapRoutesThroughApex) {
  const auto s = SpaceModel::planarCone(3 * kPi);
  const Point p = points::cone(s, 1.0, 0.0), q = points::cone(s, 1.0, 1.5 * kPi);
  // Oracle: shortest two-piece polygonal path p -> c -> q where each piece spans an angular gap of at most
  // pi, so it unfolds to a straight planar segment.
  double best = 1e300;
  for (int i = 0; i <= 200; ++i) {
    const double rho = 2.0 * i / 200.0;
    for (int j = 0; j <= 300; ++j) {
      const double psi = 1.5 * kPi * j / 300.0;
      const double g1 = psi, g2 = 1.5 * kPi - psi;
      if (g1 > kPi || g2 > kPi) continue;
      const double a = std::sqrt(1 + rho * rho - 2 * rho * std::cos(g1));
      const double b = std::sqrt(1 + rho * rho - 2 * rho * std::cos(g2));
      best = std::min(best, a + b);
    }
  }
  EXPECT_NEAR(best, 2.0, 1e-12);
  EXPECT_NEAR(distance(s, p, q), best, 1e-12);
}

TEST(Geodesic, SpiderMidpointIsApex) {
  const auto s = SpaceModel::spider(3);
  const auto g = geodesic(s, points::leg(s, 1, 1.0), points::leg(s, 2, 1.0));
  EXPECT_EQ(g(0.5), points::apex(s));
}

TEST(Geodesic, EuclideanQuarterPoint) {
  const auto s = SpaceModel::euclidean(2);
  const auto g = geodesic(s, points::euclidean(vec({0, 0})), points::euclidean(vec({2, 2})));
  const Point m = g(0.25);
  EXPECT_NEAR(m.coords[0], 0.5, 1e-15);
  EXPECT_NEAR(m.coords[1], 0.5, 1e-15);
}

TEST(Geodesic, OpenBookUnfoldsAcrossPages) {
  const auto s = SpaceModel::openBook(3, 1);
  const auto g = geodesic(s, points::page(s, 1, 1.0, vec({0})), points::page(s, 2, 1.0, vec({2})));
  const Point m = g(0.5);
  // Unfolded segment from (-1, 0) to (1, 2) meets u = 0 at v = 1.
  EXPECT_EQ(m.stratum, 0);
  EXPECT_NEAR(m.coords[0], 0.0, 1e-14);
  EXPECT_NEAR(m.coords[1], 1.0, 1e-14);
  EXPECT_NEAR(g.length(), std::hypot(2.0, 2.0), 1e-14);
}

TEST(Geodesic, AntipodalTieNeedsOptIn) {
  const auto s = SpaceModel::sphereCap(0.5);
  const Point north = points::sphere(0.0, 0.0), south = points::sphere(kPi, 0.0);
  try {
    geodesic(s, north, south);
    FAIL() << "expected NonUniqueGeodesic";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonUniqueGeodesic);
  }
  GeodesicOptions tie;
  tie.tieBreak = true;
  EXPECT_NEAR(geodesic(s, north, south, tie).length(), kPi, 1e-15);
}

TEST(LogExp, SpiderApexLogs) {
  const auto s = SpaceModel::spider(3);
  const auto v = logMap(s, points::apex(s), points::leg(s, 2, 1.5));
  EXPECT_FALSE(v.isApex);
  EXPECT_EQ(v.chart, 2);
  EXPECT_DOUBLE_EQ(v.radius, 1.5);

  const auto w = logMap(s, points::leg(s, 1, 1.0), points::apex(s));
  EXPECT_DOUBLE_EQ(w.radius, 1.0);
  EXPECT_NEAR(w.direction[0], -1.0, 1e-15);
}

TEST(LogExp, SphereNorthPole) {
  const auto s = SpaceModel::sphereCap(0.5);
  const Point pole = points::sphere(0.0, 0.0);
  const auto v = logMap(s, pole, points::sphere(0.3, kPi / 2));
  EXPECT_NEAR(v.radius, 0.3, 1e-14);
  EXPECT_NEAR(v.direction[0], 0.0, 1e-14);
  EXPECT_NEAR(v.direction[1], 1.0, 1e-14);

  const TangentCone c = tangentCone(s, pole);
  const Point q = expMap(s, pole, c.make(0, vec({0.4, 0.0})));
  EXPECT_NEAR(q.coords[0], 0.4, 1e-14);
  EXPECT_NEAR(distance(s, q, points::sphere(0.4, 0.0)), 0.0, 1e-12);
}

TEST(LogExp, ExpOfLegVectorAndZero) {
  const auto s = SpaceModel::spider(3);
  const Point a = points::apex(s);
  const auto c = tangentCone(s, a);
  EXPECT_EQ(expMap(s, a, legVector(c, 3, 2.0)), points::leg(s, 3, 2.0));
  const Point b = points::leg(s, 1, 0.7);
  EXPECT_EQ(expMap(s, b, TangentVector::apex()), b);
}

TEST(LogExp, SphereExpBeyondReachThrows) {
  const auto s = SpaceModel::sphereCap(0.3);
  const Point pole = points::sphere(0.0, 0.0);
  const auto c = tangentCone(s, pole);
  try {
    expMap(s, pole, c.make(0, vec({3.0, 0.0})));
    FAIL() << "expected NotExponentiable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotExponentiable);
  }
}

TEST(Angle, Examples) {
  const auto spider = SpaceModel::spider(3);
  const auto sc = tangentCone(spider, points::apex(spider));
  EXPECT_DOUBLE_EQ(angle(spider, points::apex(spider), legVector(sc, 1, 1), legVector(sc, 2, 1)), kPi);

  const auto book = SpaceModel::openBook(3, 1);
  const Point spine = points::spine(book, vec({0}));
  const auto bc = tangentCone(book, spine);
  EXPECT_NEAR(angle(book, spine, bc.make(0, vec({0, 1})), bc.make(2, vec({1, 0}))), kPi / 2, 1e-15);

  // Quadrant complement: link is the arc from -pi/2 to pi; (-1, 0) and (0, -1) are its two ends, 3pi/2 apart.
  const auto qc = SpaceModel::quadrantComplement();
  const Point corner = points::apex(qc);
  const auto qcone = tangentCone(qc, corner);
  const auto left = qcone.make(0, vec({-1, 0})), down = qcone.make(0, vec({0, -1}));
  EXPECT_NEAR(qcone.linkSeparation(qcone.linkCoordinate(left), qcone.linkCoordinate(down)), 1.5 * kPi, 1e-12);
  EXPECT_DOUBLE_EQ(angle(qc, corner, left, down), kPi);

  try {
    angle(spider, points::apex(spider), TangentVector::apex(), legVector(sc, 1, 1));
    FAIL() << "expected ApexVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ApexVector);
  }
}

TEST(Inner, Examples) {
  const auto s = SpaceModel::euclidean(2);
  const Point o = points::euclidean(vec({0, 0}));
  const auto c = tangentCone(s, o);
  const auto v = c.make(0, vec({2, 0})), w = c.make(0, vec({3 * std::cos(kPi / 3), 3 * std::sin(kPi / 3)}));
  EXPECT_NEAR(inner(s, o, v, w), 3.0, 1e-14);
  EXPECT_EQ(inner(s, o, v, TangentVector::apex()), 0.0);
  EXPECT_NEAR(coneDistance(s, o, v, w), std::sqrt(7.0), 1e-14);
  EXPECT_EQ(coneDistance(s, o, v, v), 0.0);

  const auto sp = SpaceModel::spider(3);
  const auto sc = tangentCone(sp, points::apex(sp));
  EXPECT_DOUBLE_EQ(inner(sp, points::apex(sp), legVector(sc, 1, 2), legVector(sc, 2, 5)), -10.0);
  EXPECT_DOUBLE_EQ(coneDistance(sp, points::apex(sp), legVector(sc, 1, 1), legVector(sc, 2, 1)), 2.0);
}

TEST(Charts, InvalidCoordinatesRejected) {
  const auto s = SpaceModel::spider(3);
  EXPECT_THROW(makePoint(s, 4, vec({1.0})), Error);
  EXPECT_THROW(makePoint(s, 1, vec({-1.0})), Error);
  EXPECT_THROW(SpaceModel::spider(2), Error);
  EXPECT_THROW(SpaceModel::planarCone(kPi), Error);
}

TEST(SpaceProperties, MetricAxioms) {
  for (const auto& s : allSpaces()) {
    RngStream rng(42, static_cast<std::uint64_t>(s.kind()) * 100 + s.dimension() + s.pages());
    for (int i = 0; i < 10000; ++i) {
      const Point x = randomPoint(s, rng), y = randomPoint(s, rng), z = randomPoint(s, rng);
      const double dxy = distance(s, x, y), dyx = distance(s, y, x);
      ASSERT_EQ(dxy, dyx) << s.describe();
      ASSERT_GE(dxy, 0.0);
      const double dxz = distance(s, x, z), dzy = distance(s, z, y);
      ASSERT_LE(dxy, dxz + dzy + 1e-12 * (1 + dxz + dzy)) << s.describe();
      ASSERT_EQ(distance(s, x, x), 0.0) << s.describe();
    }
  }
}

TEST(SpaceProperties, LogExpRoundTrip) {
  for (const auto& s : allSpaces()) {
    RngStream rng(43, static_cast<std::uint64_t>(s.kind()));
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
      const Point b = randomPoint(s, rng), p = randomPoint(s, rng);
      TangentVector v;
      try {
        v = logMap(s, b, p);
      } catch (const Error&) {
        continue; // no unique geodesic
      }
      ASSERT_NEAR(v.radius, distance(s, b, p), 1e-10 * (1 + v.radius));
      if (!exponentiable(s, b, v)) continue; // routed through the singular set
      ASSERT_LE(distance(s, expMap(s, b, v), p), 1e-10) << s.describe();
      ++checked;
    }
    EXPECT_GT(checked, 200) << s.describe();
  }
}

TEST(SpaceProperties, GeodesicConstantSpeed) {
  for (const auto& s : allSpaces()) {
    RngStream rng(44, static_cast<std::uint64_t>(s.kind()));
    GeodesicOptions tie;
    tie.tieBreak = true;
    for (int i = 0; i < 500; ++i) {
      const Point p = randomPoint(s, rng), q = randomPoint(s, rng);
      const auto g = geodesic(s, p, q, tie);
      ASSERT_LE(distance(s, g(0.0), p), 1e-12);
      ASSERT_LE(distance(s, g(1.0), q), 1e-12);
      for (int k = 0; k < 4; ++k) {
        const double a = rng.uniform(), b = rng.uniform();
        ASSERT_NEAR(distance(s, g(a), g(b)), std::abs(a - b) * g.length(), 1e-10) << s.describe();
      }
    }
  }
}

TEST(SpaceProperties, FullAnglePlanarConeIsThePlane) {
  const auto cone = SpaceModel::planarCone(2 * kPi);
  const auto plane = SpaceModel::euclidean(2);
  RngStream rng(45, 0);
  auto toPlane = [&](const Point& p) {
    if (p.stratum == 0) return points::euclidean(vec({0, 0}));
    return points::euclidean(vec({p.coords[0] * std::cos(p.coords[1]), p.coords[0] * std::sin(p.coords[1])}));
  };
  for (int i = 0; i < 2000; ++i) {
    const Point x = randomPoint(cone, rng), y = randomPoint(cone, rng), z = randomPoint(cone, rng);
    const Point X = toPlane(x), Y = toPlane(y), Z = toPlane(z);
    ASSERT_NEAR(distance(cone, x, y), distance(plane, X, Y), 1e-12);
    GeodesicOptions tie;
    tie.tieBreak = true;
    const Point m = geodesic(cone, x, y, tie)(0.3);
    ASSERT_LE(distance(plane, toPlane(m), geodesic(plane, X, Y)(0.3)), 1e-12);
    if (x.stratum == 0) continue;
    TangentVector vc, wc;
    try {
      vc = logMap(cone, x, y);
      wc = logMap(cone, x, z);
    } catch (const Error&) {
      continue;
    }
    const auto vp = logMap(plane, X, Y), wp = logMap(plane, X, Z);
    ASSERT_NEAR(inner(cone, x, vc, wc), inner(plane, X, vp, wp), 1e-12 * (1 + vc.radius * wc.radius));
  }
}

TEST(SpaceProperties, Cat0MidpointInequality) {
  const std::vector<SpaceModel> spaces{SpaceModel::spider(3), SpaceModel::spider(4), SpaceModel::openBook(3, 1),
                                       SpaceModel::openBook(3, 2), SpaceModel::planarCone(2 * kPi),
                                       SpaceModel::planarCone(3.5 * kPi), SpaceModel::euclidean(2)};
  GeodesicOptions tie;
  tie.tieBreak = true;
  for (const auto& s : spaces) {
    ASSERT_TRUE(s.isCat0());
    RngStream rng(46, static_cast<std::uint64_t>(s.kind()) * 10 + s.pages());
    for (int i = 0; i < 3000; ++i) {
      const Point x = randomPoint(s, rng), y = randomPoint(s, rng), z = randomPoint(s, rng);
      const Point m = geodesic(s, x, y, tie)(0.5);
      const double lhs = std::pow(distance(s, m, z), 2);
      const double rhs = 0.5 * std::pow(distance(s, x, z), 2) + 0.5 * std::pow(distance(s, y, z), 2) -
                         0.25 * std::pow(distance(s, x, y), 2);
      ASSERT_LE(lhs, rhs + 1e-10 * (1 + rhs)) << s.describe();
    }
  }
  EXPECT_FALSE(SpaceModel::quadrantComplement().isCat0());
  EXPECT_FALSE(SpaceModel::sphereCap(0.2).isCat0());
}
