// Acceptance suite: one PASS/FAIL line per criterion AC1..AC12, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "stratmean/collapse.hpp"
#include "stratmean/escape.hpp"
#include "stratmean/harness.hpp"
#include "stratmean/stats.hpp"
#include "test_support.hpp"

using namespace stratmean;
using namespace stratmean::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

ExperimentConfig configFor(const std::string& name, std::size_t trials, std::uint64_t seed) {
  ExperimentConfig cfg = parseConfig({{"preset", name}, {"trials", trials}, {"seed", seed}});
  cfg.threads = workers();
  return cfg;
}

double meanRadiusOnChart(const SampleTable& t, int chart) {
  double sum = 0, n = 0;
  for (const auto& r : t.rows)
    if (!r.isApex && r.chart == chart) {
      sum += r.radius;
      ++n;
    }
  return n > 0 ? sum / n : NAN;
}

Outcome ac1() {
  const auto start = Clock::now();
  const auto cfg = configFor("euclidean-corners", 2000, 101);
  const auto ctx = analyzeMean(cfg.space, cfg.measure);
  const CollapsedModel model(ctx);
  const auto emp = runSimulation(cfg, ctx, 1600);
  const auto lim = runLimit(cfg, model);
  const auto rep = compareTables(emp, lim, cfg.compare);
  const double secs = seconds(start);
  const auto sig = model.sigma();
  const bool identity = (sig - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-12;
  return {rep.energy.pValue > 0.01 && secs < 60.0 && identity && emp.failures == 0,
          "energy p=" + fmt("%.3f", rep.energy.pValue) + ", Sigma=I2 " + (identity ? "yes" : "no") + ", " +
              fmt("%.1f", secs) + " s"};
}

Outcome ac2() {
  const auto start = Clock::now();
  const auto cfg = configFor("spider-partly-sticky", 5000, 102);
  const auto ctx = analyzeMean(cfg.space, cfg.measure);
  const CollapsedModel model(ctx);
  const auto emp = runSimulation(cfg, ctx, 1600);
  const auto lim = runLimit(cfg, model);
  const auto rep = compareTables(emp, lim, cfg.compare);
  const double secs = seconds(start);
  const double apex = emp.apexFraction(), radius = meanRadiusOnChart(emp, 1);
  const bool pass = std::abs(apex - 0.5) <= 0.03 && std::abs(radius - std::sqrt(2 / kPi)) <= 0.03 &&
                    rep.energy.pValue > 0.01 && secs < 120.0;
  return {pass, "apex " + fmt("%.4f", apex) + ", leg-1 radius " + fmt("%.4f", radius) + ", energy p=" +
                    fmt("%.3f", rep.energy.pValue) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome ac3() {
  const auto cfg = configFor("spider-fully-sticky", 2000, 103);
  const auto ctx = analyzeMean(cfg.space, cfg.measure);
  const CollapsedModel model(ctx);
  const auto emp = runSimulation(cfg, ctx, 1600);
  const auto lim = runLimit(cfg, model);
  const double off = 1.0 - emp.apexFraction();
  return {off <= 0.01 && lim.apexFraction() == 1.0 && emp.failures == 0,
          "off-apex " + fmt("%.4f", off) + ", limit apex " + fmt("%.4f", lim.apexFraction())};
}

// Least-squares slope of log err against log t over the points above the rounding floor.
double fittedSlope(const std::vector<double>& t, const std::vector<double>& err, double floor) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (err[i] > floor) {
      x.push_back(std::log(t[i]));
      y.push_back(std::log(err[i]));
    }
  if (x.size() < 2) return INFINITY;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

Outcome ac4() {
  const std::vector<double> ts{1e-2, 1e-3, 1e-4};
  double worstRatio = 0, worstSlope = INFINITY;
  bool pass = true;
  for (const char* name : {"euclidean-corners", "spider-partly-sticky", "book-demo", "cone-demo"}) {
    const auto ctx = presetContext(name);
    RngStream rng(104, 0);
    for (int i = 0; i < 100; ++i) {
      const auto d = randomDelta(ctx.cone, rng);
      const auto ev = escapeVector(ctx, d).vector;
      std::vector<double> err;
      for (double t : ts) err.push_back(ctx.cone.distance(ev, escapeFdOracle(ctx, d, t)) / (1 + ev.radius));
      worstRatio = std::max(worstRatio, err[1]);
      const double slope = fittedSlope(ts, err, 1e-12);
      if (std::isfinite(slope)) worstSlope = std::min(worstSlope, slope);
      pass = pass && err[1] <= 1e-2 && slope >= 0.9;
    }
  }
  return {pass, "max ratio at t=1e-3 " + fmt("%.2e", worstRatio) + ", min slope " + fmt("%.3f", worstSlope)};
}

Outcome ac5() {
  double worst = 0;
  for (const auto& name : presetNames()) {
    const auto ctx = presetContext(name);
    RngStream rng(105, 0);
    for (int i = 0; i < 100; ++i) {
      const auto d = randomDelta(ctx.cone, rng);
      const auto ev = escapeVector(ctx, d).vector;
      for (double r : {0.0, 0.5, 2.0, 10.0}) {
        const double dist = ctx.cone.distance(escapeVector(ctx, scaleVectors(ctx.cone, d, r)).vector, ctx.cone.scaled(ev, r));
        worst = std::max(worst, dist / (1 + r));
      }
    }
  }
  return {worst <= 1e-9, "max d/(1+r) " + fmt("%.2e", worst) + " over " + std::to_string(presetNames().size()) + " presets"};
}

Outcome ac6() {
  std::size_t tested = 0, supportCases = 0, escapeViolations = 0, hullViolations = 0;
  for (const auto& name : presetNames()) {
    const auto ctx = presetContext(name);
    RngStream rng(106, 0);
    for (int i = 0; i < 1000; ++i) {
      const auto r = escapeVector(ctx, randomDelta(ctx.cone, rng));
      ++tested;
      if (!r.vector.isApex && ctx.derivative(r.direction) > ctx.escapeTol) ++escapeViolations;
    }
    for (int i = 0; i < 1000; ++i) {
      const auto r = escapeVector(ctx, supportDelta(ctx, rng));
      ++tested;
      ++supportCases;
      if (r.vector.isApex) continue;
      if (ctx.derivative(r.direction) > ctx.escapeTol) ++escapeViolations;
      if (!ctx.fluctuating.contains(r.direction)) ++hullViolations;
    }
  }
  return {escapeViolations == 0 && hullViolations == 0,
          std::to_string(tested) + " cases, " + std::to_string(escapeViolations) + " escape-cone violations, " +
              std::to_string(hullViolations) + " of " + std::to_string(supportCases) +
              " support-sampled outside the closed fluctuating cone"};
}

Outcome ac7() {
  double worst = 0;
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    RngStream rng(107, 0);
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd v = model.drawLinear(rng);
      std::vector<TangentVector> outs;
      for (int k = 0; k < 5; ++k) outs.push_back(escapeVector(model.context(), model.randomSection(v, rng)).vector);
      for (std::size_t a = 0; a < outs.size(); ++a)
        for (std::size_t b = a + 1; b < outs.size(); ++b)
          worst = std::max(worst, model.context().cone.distance(outs[a], outs[b]));
    }
  }
  return {worst <= 1e-9, "max pairwise distance " + fmt("%.2e", worst)};
}

Outcome ac8() {
  bool pass = true;
  std::string detail;
  for (const auto& name : collapsiblePresets()) {
    const auto ctx = presetContext(name);
    const auto map = chooseCollapse(ctx);
    const auto r = verifyCollapseAxioms(map, ctx);
    const bool ok = r.meanResidual <= 1e-9 && r.isometryResidual <= 1e-9 && r.innerResidual <= 1e-6 &&
                    r.homogeneityResidual <= 1e-12 && r.continuous && r.ok();
    pass = pass && ok;
    if (!ok) detail += " " + name + "(axiom " + std::to_string(r.firstFailure()) + ")";
  }
  return {pass, pass ? "all five axioms on " + std::to_string(collapsiblePresets().size()) + " built-in demos"
                     : "failing:" + detail};
}

Outcome ac9() {
  const auto ctx = presetContext("sphere-cluster");
  const CollapsedModel model(ctx);
  const TangentCone& c = ctx.cone;
  const double f0 = frechetValue(ctx.space, ctx.measure, ctx.mean);
  auto f = [&](double a, double b) {
    return frechetValue(ctx.space, ctx.measure, expMap(ctx.space, ctx.mean, c.make(0, vec({a, b}))));
  };
  // Central second differences of F o exp at the mean.
  const double h = 1e-4;
  Eigen::Matrix2d hess;
  hess(0, 0) = (f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h);
  hess(1, 1) = (f(0, h) - 2 * f0 + f(0, -h)) / (h * h);
  hess(0, 1) = hess(1, 0) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
  const Eigen::Matrix2d inv = hess.inverse();
  double worst = 0;
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(2, i);
    const Eigen::VectorXd hv = c.coords(model.distortion(model.map()(c.make(0, e))));
    worst = std::max(worst, (hv - inv.col(i)).norm() / inv.col(i).norm());
  }
  return {worst <= 1e-3, "max relative error " + fmt("%.2e", worst)};
}

Outcome ac10() {
  const int draws = 100000;
  double worstZ = 0;
  int probes = 0;
  for (const char* name :
       {"euclidean-corners", "sphere-cluster", "spider-partly-sticky", "book-demo", "cone-demo", "quadrant-demo"}) {
    const CollapsedModel model(presetContext(name));
    const auto& ctx = model.context();
    RngStream pr(110, 0);
    std::vector<TangentVector> vs;
    for (int k = 0; k < 8; ++k) vs.push_back(ctx.fluctuating.sampleUnit(pr));
    std::vector<std::vector<double>> values(vs.size(), std::vector<double>(draws));
    for (int i = 0; i < draws; ++i) {
      RngStream rng(110, limitStream(static_cast<std::uint64_t>(i)));
      const auto g = model.sampleGaussianMass(rng).mass;
      for (std::size_t k = 0; k < vs.size(); ++k) values[k][i] = pair(ctx.cone, g, vs[k]);
    }
    for (std::size_t k = 0; k < vs.size(); ++k) {
      const auto& x = values[k];
      const double m = std::accumulate(x.begin(), x.end(), 0.0) / draws;
      double s2 = 0, s4 = 0;
      for (double v : x) {
        const double d2 = (v - m) * (v - m);
        s2 += d2;
        s4 += d2 * d2;
      }
      const double var = s2 / (draws - 1);
      const double se = std::sqrt(std::max(s4 / draws - var * var, 0.0) / draws);
      const double k0 = tangentFieldCov(ctx, vs[k], vs[k]);
      worstZ = std::max(worstZ, std::abs(var - k0) / se);
      ++probes;
    }
  }
  return {worstZ <= 3.0, std::to_string(probes) + " probes, worst |var - K| / se = " + fmt("%.2f", worstZ)};
}

Outcome ac11() {
  std::size_t rows = 0, mismatches = 0;
  for (const auto& name : collapsiblePresets()) {
    const CollapsedModel model(presetContext(name));
    const auto a = limitSample(model, 111, 0, 10000, LimitPath::EscapeOfSection);
    const auto b = limitSample(model, 111, 0, 10000, LimitPath::DistortionOfDraw);
    for (std::size_t i = 0; i < a.size(); ++i) mismatches += !(a[i] == b[i]);
    rows += a.size();
  }
  return {mismatches == 0, std::to_string(rows) + " rows, " + std::to_string(mismatches) + " differ"};
}

Outcome ac12() {
  std::vector<std::string> ref;
  bool pass = true;
  for (int threads : {1, 4, 8}) {
    ExperimentConfig cfg = parseConfig(
        {{"preset", "book-demo"}, {"mode", "compare"}, {"nValues", {100, 400}}, {"trials", 500}, {"seed", 112}});
    cfg.threads = threads;
    const auto out = runExperiment(cfg);
    std::vector<std::string> csv;
    for (const auto& [tag, table] : out.tables) csv.push_back(tag + "\n" + toCsv(table));
    if (ref.empty())
      ref = csv;
    else
      pass = pass && csv == ref;
  }
  return {pass, std::to_string(ref.size()) + " tables compared at 1, 4 and 8 threads"};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Euclidean baseline", ac1},         {"partly sticky spider", ac2},   {"fully sticky spider", ac3},
      {"escape vs finite differences", ac4}, {"homogeneity", ac5},          {"confinement", ac6},
      {"section invariance", ac7},         {"collapse axioms", ac8},        {"smooth distortion = inverse Hessian", ac9},
      {"duality", ac10},                   {"code-path identity", ac11},    {"reproducibility", ac12}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("AC%zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
