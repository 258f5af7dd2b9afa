// stratmean: Monte Carlo checks of Frechet-mean limit laws on stratified model spaces.
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "stratmean/errors.hpp"
#include "stratmean/harness.hpp"

using namespace stratmean;

namespace {

std::vector<double> parseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad number '" + item + "' in list");
    }
  }
  return out;
}

struct RunArgs {
  std::string config;
  std::string preset;
  std::string out = "out";
  std::uint64_t seed = 0;
  int threads = 0;
};

int runMode(Mode mode, const RunArgs& a, CLI::App& app) {
  Json j = a.config.empty() ? Json::object() : readJsonFile(a.config);
  if (!a.preset.empty()) {
    j.erase("space");
    j.erase("measure");
    j["preset"] = a.preset;
  }
  if (!j.contains("preset") && !j.contains("space")) throw Error(ErrorCode::ConfigError, "give --config or --preset");
  j["mode"] = modeName(mode);
  if (app.count("--seed")) j["seed"] = a.seed;
  if (app.count("--threads")) j["threads"] = a.threads;
  const ExperimentConfig cfg = parseConfig(j);
  const RunOutput out = runExperiment(cfg);
  writeOutputs(out, a.out);
  std::cout << a.out << "/report.json: ok=" << (out.ok ? "true" : "false") << '\n';
  for (const auto& [tag, table] : out.tables) std::cout << "  samples_" << tag << ".csv (" << table.size() << " rows)\n";
  return out.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratmean: Frechet means, escape vectors and limit laws on stratified spaces"};
  app.require_subcommand(1);

  RunArgs run;
  const std::vector<std::pair<Mode, const char*>> modes{
      {Mode::Simulate, "rescaled empirical means for each sample size"},
      {Mode::Limit, "draws from the limiting law"},
      {Mode::Compare, "empirical tables against the limit table (or two CSV inputs)"},
      {Mode::DerivativeCheck, "escape vectors against finite differences of the barycenter"},
      {Mode::ConjectureProbe, "confined versus unconfined perturbed minimizers"},
      {Mode::Diagnose, "mean, cones, hypotheses and collapse axioms as JSON"}};
  std::vector<std::pair<CLI::App*, Mode>> subs;
  for (const auto& [mode, help] : modes) {
    CLI::App* sub = app.add_subcommand(modeName(mode), help);
    sub->add_option("--config", run.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--preset", run.preset, "built-in space and measure instead of the config's");
    sub->add_option("--out", run.out, "output directory")->capture_default_str();
    sub->add_option("--seed", run.seed, "master seed (overrides the config)");
    sub->add_option("--threads", run.threads, "worker threads (overrides the config)");
    subs.emplace_back(sub, mode);
  }

  std::string space, measure, delta, presetName, checkFd;
  CLI::App* esc = app.add_subcommand("escape", "escape vector of a tangent measure at the mean");
  esc->add_option("--space", space, "space spec: inline JSON or file");
  esc->add_option("--measure", measure, "measure: inline JSON or file");
  esc->add_option("--preset", presetName, "built-in space and measure");
  esc->add_option("--delta", delta, "tangent measure: inline JSON or file")->required();
  esc->add_option("--check-fd", checkFd, "comma-separated t values for the finite-difference oracle");

  CLI::App* list = app.add_subcommand("presets", "list built-in spaces and measures");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, mode] : subs)
      if (sub->parsed()) return runMode(mode, run, *sub);

    if (list->parsed()) {
      for (const auto& name : presetNames()) std::cout << name << ": " << preset(name).description << '\n';
      return 0;
    }

    if (esc->parsed()) {
      SpaceModel sp;
      Measure m;
      if (!presetName.empty()) {
        const Preset p = preset(presetName);
        sp = p.space;
        m = p.measure;
      } else {
        if (space.empty() || measure.empty()) throw Error(ErrorCode::ConfigError, "escape needs --preset or --space and --measure");
        sp = parseSpace(readJsonArgument(space));
        m = parseMeasure(sp, readJsonArgument(measure));
      }
      const MeanContext ctx = analyzeMean(sp, m);
      const TangentMeasure d = parseTangentMeasure(ctx.cone, readJsonArgument(delta));
      const EscapeResult r = escapeVector(ctx, d);
      Json out = toJson(r);
      out["mean"] = toJson(sp, ctx.mean);
      out["escapeCone"] = ctx.escape.describe();
      if (!checkFd.empty()) {
        Json fd = Json::array();
        for (double t : parseList(checkFd)) {
          const TangentVector v = escapeFdOracle(ctx, d, t);
          fd.push_back({{"t", t}, {"oracle", toJson(v)}, {"distance", ctx.cone.distance(v, r.vector)}});
        }
        out["finiteDifference"] = fd;
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << errorName(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
