#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "stratmean/cones.hpp"
#include "stratmean/errors.hpp"
#include "stratmean/frechet.hpp"
#include "test_support.hpp"

using namespace stratmean;
using namespace stratmean::testing;

namespace {

// Brute-force F = 1/2 sum w d^2, independent of the library's quadrature path for atom measures.
double bruteValue(const SpaceModel& s, const Measure& m, const Point& p) {
  double v = 0;
  for (const auto& a : m.atoms()) v += 0.5 * a.weight * std::pow(distance(s, p, a.point), 2);
  return v;
}

// Grid minimizer over the legs of a spider, radii in [0, 2].
Point spiderGridMin(const SpaceModel& s, const Measure& m) {
  Point best = points::apex(s);
  double bv = bruteValue(s, m, best);
  for (int leg = 1; leg <= s.pages(); ++leg)
    for (int i = 1; i <= 20000; ++i) {
      const Point p = points::leg(s, leg, 2.0 * i / 20000.0);
      const double v = bruteValue(s, m, p);
      if (v < bv) {
        bv = v;
        best = p;
      }
    }
  return best;
}

double fdDerivative(const SpaceModel& s, const Measure& m, const Point& mean, const TangentVector& theta) {
  const double h = 1e-6;
  const TangentCone c = tangentCone(s, mean);
  return (frechetValue(s, m, expMap(s, mean, c.scaled(theta, h))) - frechetValue(s, m, mean)) / h;
}

} // namespace

TEST(FrechetValue, Examples) {
  const auto s = SpaceModel::spider(3);
  const Measure two = spiderMeasure(s, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(frechetValue(s, two, points::apex(s)), 0.5);
  EXPECT_DOUBLE_EQ(frechetValue(s, two, points::apex(s)), bruteValue(s, two, points::apex(s)));
  EXPECT_EQ(frechetValue(s, dirac(points::leg(s, 2, 0.7)), points::leg(s, 2, 0.7)), 0.0);

  const auto line = SpaceModel::euclidean(1);
  const Measure pm({{points::euclidean(vec({-1})), 0.5}, {points::euclidean(vec({1})), 0.5}});
  EXPECT_DOUBLE_EQ(frechetValue(line, pm, points::euclidean(vec({0}))), 0.5);
}

TEST(FrechetMean, SpiderTwoMassSitsAtApex) {
  const auto s = SpaceModel::spider(3);
  const Measure m = spiderMeasure(s, {0.5, 0.5});
  const auto r = frechetMean(s, m);
  EXPECT_EQ(r.mean, points::apex(s));
  EXPECT_EQ(spiderGridMin(s, m), points::apex(s));
}

TEST(FrechetMean, SpiderUnbalancedMovesAlongLeg) {
  const auto s = SpaceModel::spider(3);
  const Measure m = spiderMeasure(s, {0.75, 0.25});
  const auto r = frechetMean(s, m);
  const Point grid = spiderGridMin(s, m);
  EXPECT_EQ(r.mean.stratum, 1);
  EXPECT_NEAR(r.mean.coords[0], 0.5, 1e-10);
  EXPECT_LE(distance(s, r.mean, grid), 1e-4);
}

TEST(FrechetMean, EuclideanCentroid) {
  const auto s = SpaceModel::euclidean(2);
  const Measure m({{points::euclidean(vec({0, 0})), 1},
                   {points::euclidean(vec({2, 0})), 1},
                   {points::euclidean(vec({0, 2})), 1},
                   {points::euclidean(vec({2, 2})), 1}});
  const auto r = frechetMean(s, m);
  EXPECT_NEAR(r.mean.coords[0], 1.0, 1e-12);
  EXPECT_NEAR(r.mean.coords[1], 1.0, 1e-12);
}

TEST(FrechetMean, SphereMatchesGridSearch) {
  const Preset p = preset("sphere-cluster");
  const auto r = frechetMean(p.space, p.measure);
  double best = 1e300;
  Point arg;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j < 400; ++j) {
      const Point q = points::sphere(0.2 * i / 400.0, 2 * kPi * j / 400.0);
      const double v = bruteValue(p.space, p.measure, q);
      if (v < best) {
        best = v;
        arg = q;
      }
    }
  EXPECT_LE(r.value, best + 1e-15);
  EXPECT_LE(distance(p.space, r.mean, arg), 2e-3);
  EXPECT_LE(r.gradientResidual, 1e-9);
}

TEST(FrechetMean, EquatorPairIsNotUnique) {
  const auto s = SpaceModel::sphereCap(0.2);
  const Measure m({{points::sphere(kPi / 2, 0.0), 0.5}, {points::sphere(kPi / 2, kPi), 0.5}});
  try {
    frechetMean(s, m);
    FAIL() << "expected NonUniqueMean";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonUniqueMean);
  }
  const auto report = diagnoseMeasure(s, m);
  EXPECT_TRUE(report.nonUniqueMean);
  EXPECT_FALSE(report.localized.uniqueMean);
}

TEST(DirectionalDerivative, TwoMassSpider) {
  const auto s = SpaceModel::spider(3);
  const Measure m = spiderMeasure(s, {0.5, 0.5});
  const Point a = points::apex(s);
  const auto c = tangentCone(s, a);
  const auto e1 = legVector(c, 1, 1), e3 = legVector(c, 3, 1);
  EXPECT_NEAR(directionalDerivative(s, m, a, e1), 0.0, 1e-15);
  EXPECT_NEAR(directionalDerivative(s, m, a, e3), 1.0, 1e-15);
  EXPECT_NEAR(fdDerivative(s, m, a, e1), 0.0, 1e-5);
  EXPECT_NEAR(fdDerivative(s, m, a, e3), 1.0, 1e-5);
}

TEST(DirectionalDerivative, VanishesAtEuclideanCentroid) {
  const auto ctx = presetContext("euclidean-corners");
  RngStream rng(3, 0);
  for (int i = 0; i < 50; ++i)
    EXPECT_NEAR(directionalDerivative(ctx.space, ctx.measure, ctx.mean, ctx.cone.randomUnit(rng)), 0.0, 1e-12);
}

TEST(Lambda, FlatSpacesAreExactlyHalf) {
  for (const char* name : {"euclidean-corners", "spider-partly-sticky", "book-demo", "cone-demo", "quadrant-demo"}) {
    const auto ctx = presetContext(name);
    RngStream rng(4, 0);
    for (int i = 0; i < 20; ++i) {
      const auto th = ctx.cone.randomUnit(rng);
      EXPECT_EQ(lambdaCoeff(ctx.space, ctx.measure.normalized(), ctx.mean, th), 0.5) << name;
    }
  }
  // Second difference oracle along a spider leg.
  const auto s = SpaceModel::spider(3);
  const Measure m = spiderMeasure(s, {0.5, 0.25, 0.25});
  const auto c = tangentCone(s, points::apex(s));
  EXPECT_NEAR(lambdaNumeric(s, m, points::apex(s), legVector(c, 2, 1)), 0.5, 1e-6);
}

TEST(Lambda, SphereClosedForms) {
  const auto s = SpaceModel::sphereCap(0.6);
  const Point pole = points::sphere(0.0, 0.0);
  const auto c = tangentCone(s, pole);
  const Measure radial = dirac(points::sphere(0.5, 0.0));
  EXPECT_NEAR(lambdaCoeff(s, radial, pole, c.make(0, vec({1, 0}))), 0.5, 1e-14);
  const double expected = 0.5 * 0.5 / std::tan(0.5);
  EXPECT_NEAR(expected, 0.4577, 1e-4);
  const auto ortho = c.make(0, vec({0, 1}));
  EXPECT_NEAR(lambdaCoeff(s, radial, pole, ortho), expected, 1e-14);
  EXPECT_NEAR(lambdaNumeric(s, radial, pole, ortho), expected, 1e-6);
}

TEST(Cones, EscapeExamples) {
  const auto s = SpaceModel::spider(3);
  const Point a = points::apex(s);
  const auto two = escapeCone(s, spiderMeasure(s, {0.5, 0.5}), a, 1e-8);
  EXPECT_EQ(two.pages(), (std::vector<int>{1, 2}));
  EXPECT_TRUE(escapeCone(s, spiderMeasure(s, {1.0 / 3, 1.0 / 3, 1.0 / 3}), a, 1e-8).isApexOnly());
  const auto ctx = presetContext("euclidean-corners");
  EXPECT_TRUE(ctx.escape.isFull());
}

TEST(Cones, FluctuatingExamples) {
  const auto s = SpaceModel::spider(3);
  const Point a = points::apex(s);
  const auto partly = fluctuatingCone(s, spiderMeasure(s, {0.5, 0.25, 0.25}), a, 1e-8);
  EXPECT_EQ(partly.pages(), (std::vector<int>{1}));
  const auto two = fluctuatingCone(s, spiderMeasure(s, {0.5, 0.5}), a, 1e-8);
  EXPECT_EQ(two.pages(), (std::vector<int>{1, 2}));
  EXPECT_TRUE(presetContext("euclidean-corners").fluctuating.isFull());
  // Hull of a partly sticky measure is every leg carrying mass.
  const auto ctx = presetContext("spider-partly-sticky");
  EXPECT_EQ(ctx.hull.pages(), (std::vector<int>{1, 2, 3}));
}

TEST(Diagnose, Examples) {
  for (const char* name : {"spider-two-mass", "spider-partly-sticky", "spider-fully-sticky"}) {
    const Preset p = preset(name);
    EXPECT_TRUE(diagnoseMeasure(p.space, p.measure).immured) << name;
  }
  const Preset sph = preset("sphere-cluster");
  const auto r = diagnoseMeasure(sph.space, sph.measure);
  EXPECT_TRUE(r.localized.all());
  EXPECT_TRUE(r.amenable);
}

TEST(FrechetProperties, NoDescentDirectionAtMean) {
  for (const auto& name : presetNames()) {
    const auto ctx = presetContext(name);
    const double scale = std::sqrt(ctx.secondMoment);
    RngStream rng(5, 0);
    double worst = 1e300;
    for (int i = 0; i < 720; ++i) worst = std::min(worst, ctx.derivative(ctx.cone.randomUnit(rng)));
    EXPECT_GE(worst, -1e-8 * scale) << name;
  }
}

TEST(FrechetProperties, UniformConvexityNearMean) {
  for (const auto& name : presetNames()) {
    const auto ctx = presetContext(name);
    RngStream rng(6, 0);
    const double f0 = frechetValue(ctx.space, ctx.measure, ctx.mean);
    double c = 1e300;
    const double ball = std::min(0.05, 0.5 * expReach(ctx.space, ctx.mean));
    for (int i = 0; i < 1000; ++i) {
      const auto v = ctx.cone.scaled(ctx.cone.randomUnit(rng), ball * (0.01 + 0.99 * rng.uniform()));
      if (!exponentiable(ctx.space, ctx.mean, v)) continue;
      const Point x = expMap(ctx.space, ctx.mean, v);
      c = std::min(c, (frechetValue(ctx.space, ctx.measure, x) - f0) / std::pow(distance(ctx.space, x, ctx.mean), 2));
    }
    EXPECT_GT(c, 0.0) << name;
  }
}

TEST(FrechetProperties, TaylorRemainderIsCubic) {
  for (const auto& name : presetNames()) {
    const auto ctx = presetContext(name);
    RngStream rng(7, 0);
    const double f0 = frechetValue(ctx.space, ctx.measure, ctx.mean);
    for (int dir = 0; dir < 10; ++dir) {
      const auto th = ctx.cone.randomUnit(rng);
      const double d1 = ctx.derivative(th), lam = ctx.lambda(th);
      std::vector<double> lt, lr;
      double worst = 0, tailSign = 0;
      // Smallest t first. Points sitting at rounding level are left out of the fit, and the fit
      // stops where the remainder flips sign, since there a higher-order term still competes.
      for (double t : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const auto v = ctx.cone.scaled(th, t);
        ASSERT_TRUE(exponentiable(ctx.space, ctx.mean, v)) << name;
        const double rem =
            frechetValue(ctx.space, ctx.measure, expMap(ctx.space, ctx.mean, v)) - f0 - t * d1 - t * t * lam;
        worst = std::max(worst, std::abs(rem) / (t * t * t));
        if (std::abs(rem) <= 1e-15 * (f0 + 1e-2)) continue;
        if (tailSign == 0) tailSign = rem > 0 ? 1 : -1;
        if (rem * tailSign < 0) break;
        lt.push_back(std::log(t));
        lr.push_back(std::log(std::abs(rem)));
      }
      // Fewer than two points means the remainder is at rounding level (piecewise quadratic F on flat models).
      if (lt.size() >= 2) {
        const double mt = std::accumulate(lt.begin(), lt.end(), 0.0) / lt.size();
        const double mr = std::accumulate(lr.begin(), lr.end(), 0.0) / lr.size();
        double num = 0, den = 0;
        for (std::size_t i = 0; i < lt.size(); ++i) {
          num += (lt[i] - mt) * (lr[i] - mr);
          den += (lt[i] - mt) * (lt[i] - mt);
        }
        EXPECT_GE(num / den, 2.7) << name;
      }
      EXPECT_LT(worst, 10.0) << name;
    }
  }
}

TEST(FrechetProperties, InductiveMeanAgrees) {
  for (const char* name : {"euclidean-corners", "euclidean-pm1", "spider-partly-sticky", "spider-two-mass",
                           "spider-fully-sticky", "book-demo", "cone-demo"}) {
    const Preset p = preset(name);
    const auto exact = frechetMean(p.space, p.measure);
    const Point ind = inductiveMean(p.space, p.measure, 100000);
    EXPECT_LE(distance(p.space, ind, exact.mean), 1e-6) << name;
  }
}

TEST(FrechetProperties, EscapeMembershipMatchesDerivativeSign) {
  for (const auto& name : presetNames()) {
    const auto ctx = presetContext(name);
    RngStream rng(8, 0);
    for (int i = 0; i < 1000; ++i) {
      const auto th = ctx.cone.randomUnit(rng);
      const double d = ctx.derivative(th);
      if (std::abs(d - ctx.escapeTol) <= 1e-6 * ctx.escapeTol) continue; // on the boundary
      ASSERT_EQ(ctx.escape.contains(th), d <= ctx.escapeTol) << name << " derivative " << d;
    }
  }
}
