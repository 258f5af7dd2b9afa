#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stratmean/collapse.hpp"
#include "stratmean/io.hpp"
#include "stratmean/sample_table.hpp"

namespace stratmean {

// Runs body(i) for i in [0, n) on `threads` workers; callers write results by index.
void parallelFor(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

// Stream layout: empirical trial i at size n uses (n << 32) | i; limit draws use bit 63; probe draws bit 62.
std::uint64_t empiricalStream(long n, std::uint64_t trial);
std::uint64_t limitStream(std::uint64_t draw);
std::uint64_t probeStream(std::uint64_t draw);

// sqrt(n) log_mean(empirical mean) per trial. Solver failures are counted, not stored.
SampleTable runSimulation(const ExperimentConfig& cfg, const MeanContext& ctx, long n);
SampleTable runLimit(const ExperimentConfig& cfg, const CollapsedModel& model, LimitPath path = LimitPath::EscapeOfSection);

Json summarizeTable(const SampleTable& table);

struct DerivativeCheckResult {
  double reach = 0.0;
  double step = 0.0; // s
  std::vector<double> t;
  std::vector<double> maxRelError; // per t
  double minSlope = 0.0;            // over directions with errors above the rounding floor
  double stepDependence = 0.0;      // max distance between the quotients at s and s/2 (smallest t)
  Json details;
};

DerivativeCheckResult derivativeCheck(const ExperimentConfig& cfg, const MeanContext& ctx);

struct ConjectureProbeResult {
  std::vector<double> t;
  std::vector<double> maxDiscrepancy; // per t, already divided by t
  std::vector<double> bothApexFraction;
};

ConjectureProbeResult conjectureProbe(const ExperimentConfig& cfg, const CollapsedModel& model);

struct RunOutput {
  Json report;
  std::vector<std::pair<std::string, SampleTable>> tables; // file tag -> table
  bool ok = true;
};

RunOutput runExperiment(const ExperimentConfig& cfg);
// Writes samples_<tag>.csv for every table plus report.json.
void writeOutputs(const RunOutput& out, const std::string& dir);

std::string versionString();

} // namespace stratmean
