#include "stratmean/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include <Eigen/Core>

#include "stratmean/errors.hpp"
#include "stratmean/escape.hpp"

namespace stratmean {

namespace {

double rms(const MeanContext& ctx) { return ctx.mass > 0.0 ? std::sqrt(ctx.secondMoment / ctx.mass) : 0.0; }

void requireDiagnosis(const FrechetReport& r) {
  std::string why;
  if (!r.localized.all()) why += " not localized;";
  if (!r.amenable) why += " amenability probe failed;";
  if (!r.immured) why += " immured probe failed;";
  if (!why.empty()) throw Error(ErrorCode::InvalidArgument, "measure fails the diagnosis:" + why);
}

std::vector<TangentVector> probeDirections(const TangentCone& cone, int count) {
  std::vector<TangentVector> out;
  switch (cone.kind()) {
  case ConeKind::Linear: {
    const int d = cone.ambientDim();
    if (d == 2) {
      for (int k = 0; k < count; ++k) {
        const double a = 2.0 * std::numbers::pi * k / count;
        Eigen::VectorXd c(2);
        c << std::cos(a), std::sin(a);
        out.push_back(cone.make(0, c));
      }
    } else {
      for (int i = 0; i < d; ++i)
        for (double s : {1.0, -1.0}) out.push_back(cone.make(0, s * Eigen::VectorXd::Unit(d, i)));
    }
    break;
  }
  case ConeKind::Book: {
    const int p = cone.spineDim();
    for (int j = 1; j <= cone.pages(); ++j) {
      out.push_back(cone.make(j, Eigen::VectorXd::Unit(1 + p, 0)));
      for (int i = 0; i < p; ++i)
        for (double s : {1.0, -1.0}) {
          Eigen::VectorXd c = Eigen::VectorXd::Unit(1 + p, 0);
          c[1 + i] = s;
          out.push_back(cone.make(j, c / std::sqrt(2.0)));
        }
    }
    for (int i = 0; i < p; ++i)
      for (double s : {1.0, -1.0}) out.push_back(cone.make(0, s * Eigen::VectorXd::Unit(1 + p, 1 + i)));
    break;
  }
  default:
    for (int k = 0; k < count; ++k) out.push_back(cone.fromLink(cone.linkLength() * k / count, 1.0));
  }
  return out;
}

} // namespace

std::string versionString() { return "0.1.0"; }

void parallelFor(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureLock;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failureLock);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t empiricalStream(long n, std::uint64_t trial) { return (static_cast<std::uint64_t>(n) << 32) | trial; }
std::uint64_t limitStream(std::uint64_t draw) { return (std::uint64_t{1} << 63) | draw; }
std::uint64_t probeStream(std::uint64_t draw) { return (std::uint64_t{1} << 62) | draw; }

SampleTable runSimulation(const ExperimentConfig& cfg, const MeanContext& ctx, long n) {
  std::vector<std::optional<TangentVector>> rows(cfg.trials);
  const double root = std::sqrt(static_cast<double>(n));
  parallelFor(cfg.trials, cfg.threads, [&](std::size_t i) {
    RngStream rng(cfg.seed, empiricalStream(n, i));
    try {
      const auto pts = sample(ctx.space, ctx.measure, rng, static_cast<std::size_t>(n));
      const FrechetReport r = frechetMean(ctx.space, empiricalMeasure(pts), ctx.options);
      rows[i] = ctx.cone.scaled(logMap(ctx.space, ctx.mean, r.mean), root);
    } catch (const Error&) {
      rows[i].reset();
    }
  });
  SampleTable t;
  t.tag = "empirical n=" + std::to_string(n);
  t.seed = cfg.seed;
  t.cone = ctx.cone;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]) {
      t.trials.push_back(i);
      t.rows.push_back(*rows[i]);
    } else {
      ++t.failures;
    }
  }
  return t;
}

SampleTable runLimit(const ExperimentConfig& cfg, const CollapsedModel& model, LimitPath path) {
  std::vector<TangentVector> rows(cfg.trials);
  parallelFor(cfg.trials, cfg.threads, [&](std::size_t i) {
    rows[i] = limitSample(model, cfg.seed, limitStream(i), 1, path).front();
  });
  SampleTable t;
  t.tag = "limit";
  t.seed = cfg.seed;
  t.cone = model.context().cone;
  t.rows = std::move(rows);
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.trials.push_back(i);
  return t;
}

Json summarizeTable(const SampleTable& table) {
  std::map<int, std::pair<std::size_t, double>> perChart;
  double radius = 0.0;
  std::size_t moving = 0;
  for (const auto& v : table.rows) {
    if (v.isApex) continue;
    ++moving;
    radius += v.radius;
    auto& e = perChart[v.chart];
    ++e.first;
    e.second += v.radius;
  }
  Json charts = Json::object();
  for (const auto& [chart, e] : perChart)
    charts[std::to_string(chart)] = {{"fraction", static_cast<double>(e.first) / table.size()}, {"meanRadius", e.second / e.first}};
  Json j{{"tag", table.tag},
         {"rows", table.size()},
         {"failures", table.failures},
         {"apexFraction", table.apexFraction()},
         {"meanRadiusOffApex", moving ? radius / moving : 0.0},
         {"charts", charts}};
  if (table.cone.kind() == ConeKind::Linear) {
    const MomentSummary m = coordinateMoments(table.cone, table.rows);
    Json cov = Json::array();
    for (Eigen::Index r = 0; r < m.covariance.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < m.covariance.cols(); ++c) row.push_back(m.covariance(r, c));
      cov.push_back(row);
    }
    j["covariance"] = cov;
  }
  return j;
}

DerivativeCheckResult derivativeCheck(const ExperimentConfig& cfg, const MeanContext& ctx) {
  DerivativeCheckResult out;
  const double reach = expReach(ctx.space, ctx.mean);
  out.reach = std::isfinite(reach) ? reach : 10.0 * rms(ctx);
  out.step = 0.1 * out.reach;
  out.t = cfg.derivative.t;
  out.maxRelError.assign(out.t.size(), 0.0);
  out.minSlope = std::numeric_limits<double>::infinity();
  out.details = Json::array();
  const auto dirs = probeDirections(ctx.cone, cfg.derivative.directions);
  std::vector<Json> rows(dirs.size());
  std::vector<std::vector<double>> errs(dirs.size(), std::vector<double>(out.t.size()));
  std::vector<double> stepDep(dirs.size(), 0.0);
  parallelFor(dirs.size(), cfg.threads, [&](std::size_t k) {
    TangentMeasure delta;
    delta.add(dirs[k], 1.0);
    const EscapeResult ev = escapeVector(ctx, delta);
    Json e = Json::array();
    for (std::size_t i = 0; i < out.t.size(); ++i) {
      const TangentVector fd = perturbedLog(ctx, delta, out.t[i], out.step);
      errs[k][i] = ctx.cone.distance(ev.vector, fd) / (1.0 + ev.vector.radius);
      e.push_back(errs[k][i]);
    }
    const double tMin = *std::min_element(out.t.begin(), out.t.end());
    stepDep[k] = ctx.cone.distance(perturbedLog(ctx, delta, tMin, out.step), perturbedLog(ctx, delta, tMin, 0.5 * out.step));
    rows[k] = {{"direction", toJson(dirs[k])}, {"escape", toJson(ev.vector)}, {"relError", e}, {"stepDependence", stepDep[k]}};
  });
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    for (std::size_t i = 0; i < out.t.size(); ++i) out.maxRelError[i] = std::max(out.maxRelError[i], errs[k][i]);
    out.stepDependence = std::max(out.stepDependence, stepDep[k]);
    if (out.t.size() >= 2) {
      const double e0 = errs[k].front(), e1 = errs[k].back();
      if (e0 > 1e-12 && e1 > 1e-12) {
        const double slope = std::log(e0 / e1) / std::log(out.t.front() / out.t.back());
        out.minSlope = std::min(out.minSlope, slope);
      }
    }
    out.details.push_back(rows[k]);
  }
  return out;
}

ConjectureProbeResult conjectureProbe(const ExperimentConfig& cfg, const CollapsedModel& model) {
  const MeanContext& ctx = model.context();
  ConjectureProbeResult out;
  out.t = cfg.conjecture.t;
  const std::size_t draws = static_cast<std::size_t>(cfg.conjecture.draws);
  std::vector<std::vector<double>> disc(draws, std::vector<double>(out.t.size()));
  std::vector<std::vector<char>> apex(draws, std::vector<char>(out.t.size()));
  const ConeRepr whole = ConeRepr::full(ctx.cone);
  parallelFor(draws, cfg.threads, [&](std::size_t i) {
    RngStream rng(cfg.seed, probeStream(i));
    const TangentMeasure g = model.sampleGaussianMass(rng).mass;
    for (std::size_t k = 0; k < out.t.size(); ++k) {
      const TangentVector a = minimizePerturbed(ctx, g, out.t[k], whole);
      const TangentVector b = minimizePerturbed(ctx, g, out.t[k], ctx.fluctuating);
      disc[i][k] = ctx.cone.distance(a, b) / out.t[k];
      apex[i][k] = a.isApex && b.isApex;
    }
  });
  out.maxDiscrepancy.assign(out.t.size(), 0.0);
  out.bothApexFraction.assign(out.t.size(), 0.0);
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    std::size_t both = 0;
    for (std::size_t i = 0; i < draws; ++i) {
      out.maxDiscrepancy[k] = std::max(out.maxDiscrepancy[k], disc[i][k]);
      both += apex[i][k] ? 1 : 0;
    }
    out.bothApexFraction[k] = static_cast<double>(both) / static_cast<double>(draws);
  }
  return out;
}

RunOutput runExperiment(const ExperimentConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  RunOutput out;
  Json& rep = out.report;
  rep["version"] = versionString();
  rep["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                            "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  rep["config"] = configToJson(cfg);

  if (cfg.mode == Mode::Compare && !cfg.inputs.empty()) {
    // Plain two-sample comparison of existing tables; the cone comes from the configured measure.
    const MeanContext ctx = analyzeMean(cfg.space, cfg.measure, cfg.tolerances);
    std::ifstream a(cfg.inputs[0]), b(cfg.inputs[1]);
    if (!a || !b) throw Error(ErrorCode::ConfigError, "cannot open compare inputs");
    const SampleTable ta = readCsv(a, ctx.cone), tb = readCsv(b, ctx.cone);
    const TestReport r = compareTables(ta, tb, cfg.compare);
    rep["compare"] = toJson(r);
    rep["tables"] = {summarizeTable(ta), summarizeTable(tb)};
    out.ok = r.pass;
    rep["ok"] = out.ok;
    return out;
  }

  const FrechetReport diag = diagnoseMeasure(cfg.space, cfg.measure, cfg.tolerances);
  rep["diagnose"] = toJson(cfg.space, diag);
  if (cfg.mode == Mode::Diagnose) {
    try {
      const MeanContext ctx = analyzeMean(cfg.space, cfg.measure, cfg.tolerances);
      rep["escapeCone"] = ctx.escape.describe();
      rep["hull"] = ctx.hull.describe();
      rep["fluctuatingCone"] = ctx.fluctuating.describe();
      try {
        const CollapseMap map = chooseCollapse(ctx);
        rep["collapse"] = {{"map", map.describe()}, {"axioms", toJson(verifyCollapseAxioms(map, ctx))}};
      } catch (const AxiomError& e) {
        rep["collapse"] = {{"error", e.what()}, {"axiom", e.axiom()}};
      }
    } catch (const Error& e) {
      rep["error"] = e.what();
    }
    out.ok = diag.localized.all() && diag.amenable && diag.immured;
    rep["ok"] = out.ok;
    return out;
  }

  requireDiagnosis(diag);
  const MeanContext ctx = analyzeMean(cfg.space, cfg.measure, cfg.tolerances);
  rep["escapeCone"] = ctx.escape.describe();
  rep["fluctuatingCone"] = ctx.fluctuating.describe();

  auto failRate = [&](const SampleTable& t) { return static_cast<double>(t.failures) / static_cast<double>(cfg.trials); };

  switch (cfg.mode) {
  case Mode::Simulate: {
    Json tables = Json::array();
    for (long n : cfg.nValues) {
      SampleTable t = runSimulation(cfg, ctx, n);
      tables.push_back(summarizeTable(t));
      if (failRate(t) > 1e-3) out.ok = false;
      out.tables.emplace_back("n" + std::to_string(n), std::move(t));
    }
    rep["tables"] = tables;
    break;
  }
  case Mode::Limit: {
    const CollapsedModel model(ctx);
    rep["collapse"] = model.map().describe();
    SampleTable t = runLimit(cfg, model);
    rep["tables"] = {summarizeTable(t)};
    out.tables.emplace_back("limit", std::move(t));
    break;
  }
  case Mode::Compare: {
    const CollapsedModel model(ctx);
    rep["collapse"] = model.map().describe();
    SampleTable limit = runLimit(cfg, model);
    Json trend = Json::array();
    Json tables = Json::array({summarizeTable(limit)});
    for (std::size_t i = 0; i < cfg.nValues.size(); ++i) {
      const long n = cfg.nValues[i];
      SampleTable t = runSimulation(cfg, ctx, n);
      const TestReport r = compareTables(t, limit, cfg.compare);
      Json entry = toJson(r);
      entry["n"] = n;
      trend.push_back(entry);
      tables.push_back(summarizeTable(t));
      if (failRate(t) > 1e-3) out.ok = false;
      // Only the largest sample size gates the run.
      if (i + 1 == cfg.nValues.size()) {
        rep["compare"] = entry;
        out.ok = out.ok && r.pass;
      }
      out.tables.emplace_back("n" + std::to_string(n), std::move(t));
    }
    out.tables.emplace_back("limit", std::move(limit));
    rep["trend"] = trend;
    rep["tables"] = tables;
    break;
  }
  case Mode::DerivativeCheck: {
    const DerivativeCheckResult r = derivativeCheck(cfg, ctx);
    rep["derivativeCheck"] = {{"reach", r.reach},
                              {"step", r.step},
                              {"t", r.t},
                              {"maxRelError", r.maxRelError},
                              {"minSlope", std::isfinite(r.minSlope) ? Json(r.minSlope) : Json(nullptr)},
                              {"stepDependence", r.stepDependence},
                              {"directions", r.details}};
    break;
  }
  case Mode::ConjectureProbe: {
    const CollapsedModel model(ctx);
    const ConjectureProbeResult r = conjectureProbe(cfg, model);
    rep["conjectureProbe"] = {{"t", r.t}, {"maxDiscrepancy", r.maxDiscrepancy}, {"bothApexFraction", r.bothApexFraction}};
    break;
  }
  case Mode::Diagnose: break;
  }
  rep["ok"] = out.ok;
  rep["seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

void writeOutputs(const RunOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [tag, table] : out.tables) writeTextFile((std::filesystem::path(dir) / ("samples_" + tag + ".csv")).string(), toCsv(table));
  writeTextFile((std::filesystem::path(dir) / "report.json").string(), out.report.dump(2) + "\n");
}

} // namespace stratmean
