#include <gtest/gtest.h>

#include <cmath>

#include "stratmean/collapse.hpp"
#include "stratmean/errors.hpp"
#include "stratmean/escape.hpp"
#include "stratmean/nnls.hpp"
#include "stratmean/stats.hpp"
#include "test_support.hpp"

using namespace stratmean;
using namespace stratmean::testing;

namespace {

TangentMeasure single(const TangentVector& v, double w = 1.0) {
  TangentMeasure d;
  d.add(v, w);
  return d;
}

Eigen::VectorXd v1(double x) { return vec({x}); }

} // namespace

TEST(CollapseMap, SpiderFolding) {
  const auto ctx = presetContext("spider-partly-sticky");
  const auto L = CollapseMap::pageFolding(ctx.cone, 1);
  EXPECT_EQ(L.targetDim(), 1);
  EXPECT_EQ(L(legVector(ctx.cone, 1, 0.8))[0], 0.8);
  EXPECT_EQ(L(legVector(ctx.cone, 3, 0.8))[0], -0.8);
  EXPECT_EQ(L(TangentVector::apex())[0], 0.0);

  TangentMeasure d;
  d.add(legVector(ctx.cone, 1, 2), 0.5);
  d.add(legVector(ctx.cone, 2, 2), 0.5);
  EXPECT_EQ(L(d)[0], 0.0);
  EXPECT_EQ(L(TangentMeasure())[0], 0.0);
  EXPECT_EQ(L(single(legVector(ctx.cone, 3, 3)))[0], -3.0);
}

TEST(CollapseMap, BookFoldingKeepsSpine) {
  const auto ctx = presetContext("book-demo");
  const auto L = CollapseMap::pageFolding(ctx.cone, 1);
  ASSERT_EQ(L.targetDim(), 1 + ctx.cone.spineDim());
  const auto onPage2 = ctx.cone.make(2, vec({0.5, -0.25}));
  const auto img = L(onPage2);
  EXPECT_NEAR(img[0], -0.5, 1e-15);
  EXPECT_NEAR(img[1], -0.25, 1e-15);
}

TEST(CollapseAxioms, PartlyStickyFoldingPasses) {
  const auto ctx = presetContext("spider-partly-sticky");
  const auto rep = verifyCollapseAxioms(CollapseMap::pageFolding(ctx.cone, 1), ctx);
  EXPECT_TRUE(rep.ok());
  EXPECT_LE(rep.meanResidual, 1e-9);
  EXPECT_LE(rep.isometryResidual, 1e-9);
  EXPECT_LE(rep.innerResidual, 1e-9);
  EXPECT_LE(rep.homogeneityResidual, 1e-12);
}

TEST(CollapseAxioms, EuclideanIdentityIsExactUpToRounding) {
  const auto ctx = presetContext("euclidean-corners");
  const auto rep = verifyCollapseAxioms(CollapseMap::identity(ctx.cone), ctx);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.meanResidual, 0.0);
  EXPECT_LE(rep.isometryResidual, 1e-15);
  EXPECT_LE(rep.innerResidual, 1e-15);
  EXPECT_LE(rep.homogeneityResidual, 1e-15);
}

TEST(CollapseAxioms, FoldingOnNonEscapePageIsNotInjective) {
  // Legs 1 and 2 carry the fluctuating cone; folding around leg 3 sends both to -u.
  const auto ctx = presetContext("spider-two-mass");
  const auto rep = verifyCollapseAxioms(CollapseMap::pageFolding(ctx.cone, 3), ctx);
  EXPECT_FALSE(rep.injective);
  EXPECT_FALSE(rep.ok());
}

TEST(CollapseAxioms, TwoMassSpiderAdmitsNoCollapse) {
  // Mean zero forces L(e2) = -L(e1); preserving <e1, e3> = <e2, e3> = -1 then asks L(e3) to have inner
  // product -1 with both L(e1) and -L(e1).
  const auto ctx = presetContext("spider-two-mass");
  try {
    chooseCollapse(ctx);
    FAIL() << "expected AxiomError";
  } catch (const AxiomError& e) {
    EXPECT_EQ(e.axiom(), 3);
    EXPECT_EQ(e.code(), ErrorCode::AxiomViolation);
  }
}

TEST(CollapseAxioms, ChosenMapsPassOnCollapsiblePresets) {
  for (const auto& name : collapsiblePresets()) {
    const auto ctx = presetContext(name);
    const auto rep = verifyCollapseAxioms(chooseCollapse(ctx), ctx);
    EXPECT_TRUE(rep.ok()) << name << " first failure " << rep.firstFailure();
    EXPECT_LE(rep.homogeneityResidual, 1e-12) << name;
    EXPECT_LE(rep.continuityModulus, 10.0) << name;
  }
}

TEST(Section, PartlyStickySpider) {
  const CollapsedModel model(presetContext("spider-partly-sticky"));
  const auto& L = model.map();

  const auto plus = model.section(v1(0.7));
  ASSERT_EQ(plus.size(), 1u);
  EXPECT_EQ(plus.atoms()[0].vector.chart, 1);
  EXPECT_NEAR(plus.atoms()[0].weight * plus.atoms()[0].vector.radius, 0.7, 1e-15);

  const auto minus = model.section(v1(-0.3));
  double mass = 0;
  for (const auto& a : minus.atoms()) {
    EXPECT_NE(a.vector.chart, 1);
    EXPECT_GE(a.weight, 0.0);
    mass += a.weight * a.vector.radius;
  }
  EXPECT_NEAR(mass, 0.3, 1e-15);
  EXPECT_NEAR(L(minus)[0], -0.3, 1e-10);

  EXPECT_TRUE(model.section(v1(0.0)).empty());
}

TEST(Section, OutsideHullIsInfeasible) {
  // Mass on the x-axis spans one direction of R^2.
  const auto s = SpaceModel::euclidean(2);
  const Measure m({{points::euclidean(vec({-1, 0})), 0.5}, {points::euclidean(vec({1, 0})), 0.5}});
  const CollapsedModel model(analyzeMean(s, m));
  EXPECT_EQ(model.hullBasis().cols(), 1);
  try {
    model.section(vec({0.0, 1.0}));
    FAIL() << "expected Infeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(Distortion, Examples) {
  const CollapsedModel model(presetContext("spider-partly-sticky"));
  const auto h = model.distortion(v1(0.7));
  EXPECT_EQ(h.chart, 1);
  EXPECT_NEAR(h.radius, 0.7, 1e-14);
  EXPECT_TRUE(model.distortion(v1(-0.3)).isApex);

  const CollapsedModel flat(presetContext("euclidean-corners"));
  RngStream rng(1, 0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd v = vec({rng.normal(), rng.normal()});
    EXPECT_LE((flat.context().cone.coords(flat.distortion(v)) - v).norm(), 1e-12 * (1 + v.norm()));
  }
}

TEST(Covariance, Examples) {
  const auto partly = presetContext("spider-partly-sticky");
  const auto sig = collapsedCovariance(CollapseMap::pageFolding(partly.cone, 1), partly.logged);
  ASSERT_EQ(sig.rows(), 1);
  EXPECT_NEAR(sig(0, 0), 1.0, 1e-15);

  const auto s = SpaceModel::spider(3);
  const auto pm = analyzeMean(s, dirac(points::apex(s)));
  EXPECT_EQ(collapsedCovariance(CollapseMap::pageFolding(pm.cone, 1), pm.logged).norm(), 0.0);

  const auto corners = presetContext("euclidean-corners");
  const auto c2 = collapsedCovariance(CollapseMap::identity(corners.cone), corners.logged);
  EXPECT_LE((c2 - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-14);
}

TEST(GaussianMass, ZeroCovarianceGivesEmptyMass) {
  const CollapsedModel model(presetContext("spider-fully-sticky"));
  RngStream rng(2, 0);
  const auto g = model.sampleGaussianMass(rng);
  EXPECT_EQ(g.linearDraw.norm(), 0.0);
  EXPECT_TRUE(g.mass.empty());
}

TEST(GaussianMass, VarianceAndResidual) {
  const CollapsedModel model(presetContext("spider-partly-sticky"));
  double sq = 0;
  for (int i = 0; i < 100000; ++i) {
    RngStream rng(3, static_cast<std::uint64_t>(i));
    const auto g = model.sampleGaussianMass(rng);
    sq += g.linearDraw.squaredNorm();
    ASSERT_LE((model.map()(g.mass) - g.linearDraw).norm(), 1e-10);
    ASSERT_LE(g.mass.size(), static_cast<std::size_t>(model.map().targetDim()));
    for (const auto& a : g.mass.atoms()) ASSERT_GE(a.weight, 0.0);
  }
  EXPECT_NEAR(sq / 1e5, 1.0, 0.02);
}

TEST(GaussianMass, ResidualOnEveryModel) {
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    for (int i = 0; i < 2000; ++i) {
      RngStream rng(4, static_cast<std::uint64_t>(i));
      const auto g = model.sampleGaussianMass(rng);
      ASSERT_LE((model.map()(g.mass) - g.linearDraw).norm(), 1e-10) << name;
      ASSERT_LE(static_cast<int>(g.mass.size()), std::max(model.map().targetDim(), 0)) << name;
    }
  }
}

TEST(LimitSample, PartlyStickyHalfNormal) {
  const CollapsedModel model(presetContext("spider-partly-sticky"));
  const auto rows = limitSample(model, 5, 0, 100000);
  double apex = 0, radius = 0, off = 0;
  for (const auto& r : rows) {
    if (r.isApex) {
      ++apex;
    } else {
      ASSERT_EQ(r.chart, 1);
      radius += r.radius;
      ++off;
    }
  }
  EXPECT_NEAR(apex / 1e5, 0.5, 0.005);
  EXPECT_NEAR(radius / off, std::sqrt(2 / kPi), 0.01);
}

TEST(LimitSample, EuclideanCornersIsStandardNormal) {
  const CollapsedModel model(presetContext("euclidean-corners"));
  const auto rows = limitSample(model, 6, 0, 100000);
  const auto mom = coordinateMoments(model.context().cone, rows);
  EXPECT_LE((mom.covariance - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(LimitSample, FullyStickyIsAllApex) {
  const CollapsedModel model(presetContext("spider-fully-sticky"));
  for (const auto& r : limitSample(model, 7, 0, 1000)) ASSERT_TRUE(r.isApex);
}

TEST(LimitSample, CodePathsAgreeRowByRow) {
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    const auto a = limitSample(model, 8, 0, 2000, LimitPath::EscapeOfSection);
    const auto b = limitSample(model, 8, 0, 2000, LimitPath::DistortionOfDraw);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]) << name << " row " << i;
  }
}

TEST(TangentFieldCov, Examples) {
  const auto ctx = presetContext("spider-partly-sticky");
  const auto e1 = legVector(ctx.cone, 1, 1.0);
  EXPECT_NEAR(tangentFieldCov(ctx, e1, e1), 1.0, 1e-15);

  const auto s = SpaceModel::euclidean(2);
  const Measure m({{points::euclidean(vec({1, 1})), 0.5}, {points::euclidean(vec({1, -1})), 0.5}});
  const auto flat = analyzeMean(s, m);
  const auto x = flat.cone.make(0, vec({1, 0}));
  EXPECT_NEAR(tangentFieldCov(flat, x, x), 0.0, 1e-15);
}

TEST(TangentFieldCov, RepresentationOnFluctuatingCone) {
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    const auto& ctx = model.context();
    if (ctx.fluctuating.isApexOnly()) continue;
    RngStream rng(9, 0);
    for (int i = 0; i < 100; ++i) {
      const auto v = ctx.fluctuating.sampleUnit(rng), w = ctx.fluctuating.sampleUnit(rng);
      const double k = tangentFieldCov(ctx, v, w);
      const double rep = model.map()(v).dot(model.sigma() * model.map()(w));
      ASSERT_NEAR(k, rep, 1e-10) << name;
    }
  }
}

TEST(CollapseProperties, SectionInvariance) {
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    if (model.hullBasis().cols() == 0) continue;
    const auto& cone = model.context().cone;
    RngStream rng(10, 0);
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd v = model.drawLinear(rng);
      std::vector<TangentVector> outs;
      for (int k = 0; k < 5; ++k) {
        const auto sec = model.randomSection(v, rng);
        ASSERT_LE((model.map()(sec) - v).norm(), 1e-10 * (1 + v.norm())) << name;
        outs.push_back(escapeVector(model.context(), sec).vector);
      }
      for (std::size_t a = 0; a < outs.size(); ++a)
        for (std::size_t b = a + 1; b < outs.size(); ++b) ASSERT_LE(cone.distance(outs[a], outs[b]), 1e-9) << name;
    }
  }
}

TEST(CollapseProperties, EqualImagesPairEquallyOnFluctuatingCone) {
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    const auto& ctx = model.context();
    if (model.hullBasis().cols() == 0 || ctx.fluctuating.isApexOnly()) continue;
    RngStream rng(11, 0);
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd v = model.drawLinear(rng);
      const auto a = model.randomSection(v, rng), b = model.randomSection(v, rng);
      for (int k = 0; k < 5; ++k) {
        const auto x = ctx.fluctuating.sampleUnit(rng);
        ASSERT_NEAR(pair(ctx.cone, a, x), pair(ctx.cone, b, x), 1e-9) << name;
      }
    }
  }
}

TEST(Nnls, RecoversNonnegativeSolution) {
  Eigen::MatrixXd a(3, 4);
  a << 1, 0, 1, 2, 0, 1, 1, -1, 1, 1, 0, 0;
  const Eigen::VectorXd x0 = vec({0.5, 0.0, 1.5, 0.25});
  const auto r = nnls(a, a * x0);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_GE(r.x.minCoeff(), 0.0);
  EXPECT_LE((a * r.x - a * x0).norm(), 1e-12);
}
