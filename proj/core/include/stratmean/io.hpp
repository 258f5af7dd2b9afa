#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratmean/collapse.hpp"
#include "stratmean/escape.hpp"
#include "stratmean/frechet.hpp"
#include "stratmean/measure.hpp"
#include "stratmean/space.hpp"
#include "stratmean/stats.hpp"

namespace stratmean {

using Json = nlohmann::json;

enum class Mode { Simulate, Limit, Compare, DerivativeCheck, ConjectureProbe, Diagnose };

const char* modeName(Mode mode);
Mode parseMode(const std::string& name);

struct DerivativeOptions {
  std::vector<double> t{1e-2, 1e-3};
  int directions = 16;
};

struct ConjectureOptions {
  int draws = 1000;
  std::vector<double> t{1e-2, 1e-3};
};

struct ExperimentConfig {
  Mode mode = Mode::Simulate;
  std::string preset; // empty when space and measure were given explicitly
  SpaceModel space;
  Measure measure;
  std::vector<long> nValues{100, 400, 1600};
  std::size_t trials = 2000;
  std::uint64_t seed = 1;
  int threads = 1;
  FrechetOptions tolerances;
  CompareOptions compare;
  DerivativeOptions derivative;
  ConjectureOptions conjecture;
  // compare mode: two CSV files to compare instead of simulating
  std::vector<std::string> inputs;
};

struct Preset {
  std::string name;
  std::string description;
  SpaceModel space;
  Measure measure;
};

const std::vector<std::string>& presetNames();
Preset preset(const std::string& name);

SpaceModel parseSpace(const Json& j);
Json spaceToJson(const SpaceModel& space);
Measure parseMeasure(const SpaceModel& space, const Json& j);
Json measureToJson(const SpaceModel& space, const Measure& m);
TangentMeasure parseTangentMeasure(const TangentCone& cone, const Json& j);

// Unknown keys are rejected at every level.
ExperimentConfig parseConfig(const Json& j);
ExperimentConfig loadConfig(const std::string& path);
Json configToJson(const ExperimentConfig& cfg);

Json toJson(const SpaceModel& space, const Point& p);
Json toJson(const TangentVector& v);
Json toJson(const SpaceModel& space, const FrechetReport& r);
Json toJson(const EscapeResult& r);
Json toJson(const TestReport& r);
Json toJson(const CollapseAxiomReport& r);

Json readJsonFile(const std::string& path);
// Accepts inline JSON (leading '{') or a path to a JSON file.
Json readJsonArgument(const std::string& text);
void writeTextFile(const std::string& path, const std::string& content);

} // namespace stratmean
