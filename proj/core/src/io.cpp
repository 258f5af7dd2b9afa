#include "stratmean/io.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

constexpr double kPi = std::numbers::pi;

void checkKeys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw Error(ErrorCode::ConfigError, where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorCode::ConfigError, where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, where + "." + key + ": " + e.what());
  }
}

template <class T>
T getOr(const Json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

Eigen::VectorXd vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> stdvec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd v1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd v2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

} // namespace

const char* modeName(Mode mode) {
  switch (mode) {
  case Mode::Simulate: return "simulate";
  case Mode::Limit: return "limit";
  case Mode::Compare: return "compare";
  case Mode::DerivativeCheck: return "derivative-check";
  case Mode::ConjectureProbe: return "conjecture-probe";
  case Mode::Diagnose: return "diagnose";
  }
  return "?";
}

Mode parseMode(const std::string& name) {
  for (Mode m : {Mode::Simulate, Mode::Limit, Mode::Compare, Mode::DerivativeCheck, Mode::ConjectureProbe, Mode::Diagnose})
    if (name == modeName(m)) return m;
  throw Error(ErrorCode::ConfigError, "unknown mode '" + name + "'");
}

const std::vector<std::string>& presetNames() {
  static const std::vector<std::string> names{
      "euclidean-pm1",      "euclidean-corners",   "sphere-cluster", "spider-two-mass", "spider-partly-sticky",
      "spider-fully-sticky", "book-demo",          "cone-demo",      "quadrant-demo"};
  return names;
}

Preset preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "euclidean-pm1") {
    p.space = SpaceModel::euclidean(1);
    p.measure = Measure({{points::euclidean(v1(-1.0)), 0.5}, {points::euclidean(v1(1.0)), 0.5}});
    p.description = "two atoms at -1 and +1 on the line";
  } else if (name == "euclidean-corners") {
    p.space = SpaceModel::euclidean(2);
    std::vector<Atom> atoms;
    for (double x : {-1.0, 1.0})
      for (double y : {-1.0, 1.0}) atoms.push_back({points::euclidean(v2(x, y)), 0.25});
    p.measure = Measure(atoms);
    p.description = "equal atoms at the four corners (+-1, +-1)";
  } else if (name == "sphere-cluster") {
    p.space = SpaceModel::sphereCap(0.2);
    p.measure = Measure({{points::sphere(0.10, 0.0), 0.5}, {points::sphere(0.15, 2.0), 0.3}, {points::sphere(0.12, 4.0), 0.2}});
    p.description = "three atoms within 0.2 of the north pole";
  } else if (name == "spider-two-mass") {
    p.space = SpaceModel::spider(3);
    p.measure = Measure({{points::leg(p.space, 1, 1.0), 0.5}, {points::leg(p.space, 2, 1.0), 0.5}});
    p.description = "half on leg 1, half on leg 2, at distance 1";
  } else if (name == "spider-partly-sticky") {
    p.space = SpaceModel::spider(3);
    p.measure = Measure({{points::leg(p.space, 1, 1.0), 0.5}, {points::leg(p.space, 2, 1.0), 0.25}, {points::leg(p.space, 3, 1.0), 0.25}});
    p.description = "weights 1/2, 1/4, 1/4 on the three legs at distance 1";
  } else if (name == "spider-fully-sticky") {
    p.space = SpaceModel::spider(3);
    const double w = 1.0 / 3.0;
    p.measure = Measure({{points::leg(p.space, 1, 1.0), w}, {points::leg(p.space, 2, 1.0), w}, {points::leg(p.space, 3, 1.0), w}});
    p.description = "equal weights on the three legs at distance 1";
  } else if (name == "book-demo") {
    p.space = SpaceModel::openBook(3, 1);
    p.measure = Measure({{points::page(p.space, 1, 1.0, v1(0.0)), 0.5},
                         {points::page(p.space, 2, 1.0, v1(1.0)), 0.25},
                         {points::page(p.space, 3, 1.0, v1(-1.0)), 0.25}});
    p.description = "three-page book: page 1 (1,0) w 1/2, page 2 (1,1) and page 3 (1,-1) w 1/4";
  } else if (name == "cone-demo") {
    p.space = SpaceModel::planarCone(3.0 * kPi);
    p.measure = Measure({{points::cone(p.space, 1.0, 0.0), 0.5},
                         {points::cone(p.space, 1.0, 1.2 * kPi), 0.25},
                         {points::cone(p.space, 1.0, 1.8 * kPi), 0.25}});
    p.description = "cone of angle 3 pi: unit atoms at angles 0, 1.2 pi, 1.8 pi with weights 1/2, 1/4, 1/4";
  } else if (name == "quadrant-demo") {
    p.space = SpaceModel::quadrantComplement();
    const double w = 1.0 / 3.0;
    p.measure = Measure({{points::plane(p.space, 0.0, -1.0), w}, {points::plane(p.space, -1.0, 0.0), w}, {points::plane(p.space, 1.0, 1.0), w}});
    p.description = "plane minus the open third quadrant: atoms (0,-1), (-1,0), (1,1)";
  } else {
    throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
  }
  p.measure.validate(p.space);
  return p;
}

SpaceModel parseSpace(const Json& j) {
  const std::string where = "space";
  const std::string kind = get<std::string>(j, "kind", where);
  if (kind == "euclidean") {
    checkKeys(j, {"kind", "dim"}, where);
    return SpaceModel::euclidean(getOr<int>(j, "dim", 2, where));
  }
  if (kind == "sphere-cap") {
    checkKeys(j, {"kind", "radius"}, where);
    return SpaceModel::sphereCap(get<double>(j, "radius", where));
  }
  if (kind == "spider") {
    checkKeys(j, {"kind", "k"}, where);
    return SpaceModel::spider(getOr<int>(j, "k", 3, where));
  }
  if (kind == "open-book") {
    checkKeys(j, {"kind", "k", "p"}, where);
    return SpaceModel::openBook(getOr<int>(j, "k", 3, where), getOr<int>(j, "p", 1, where));
  }
  if (kind == "planar-cone") {
    checkKeys(j, {"kind", "angle"}, where);
    return SpaceModel::planarCone(get<double>(j, "angle", where));
  }
  if (kind == "quadrant-complement") {
    checkKeys(j, {"kind"}, where);
    return SpaceModel::quadrantComplement();
  }
  throw Error(ErrorCode::ConfigError, "space: unknown kind '" + kind + "'");
}

Json spaceToJson(const SpaceModel& space) {
  switch (space.kind()) {
  case SpaceKind::Euclidean: return {{"kind", "euclidean"}, {"dim", space.dimension()}};
  case SpaceKind::SphereCap: return {{"kind", "sphere-cap"}, {"radius", space.supportRadius()}};
  case SpaceKind::Spider: return {{"kind", "spider"}, {"k", space.pages()}};
  case SpaceKind::OpenBook: return {{"kind", "open-book"}, {"k", space.pages()}, {"p", space.spineDim()}};
  case SpaceKind::PlanarCone: return {{"kind", "planar-cone"}, {"angle", space.coneAngle()}};
  case SpaceKind::QuadrantComplement: return {{"kind", "quadrant-complement"}};
  }
  return {};
}

Measure parseMeasure(const SpaceModel& space, const Json& j) {
  checkKeys(j, {"atoms", "segments"}, "measure");
  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      checkKeys(a, {"stratum", "coords", "weight"}, "measure.atoms[]");
      const int stratum = parseStratum(space, get<std::string>(a, "stratum", "measure.atoms[]"));
      const auto coords = get<std::vector<double>>(a, "coords", "measure.atoms[]");
      atoms.push_back({makePoint(space, stratum, vec(coords)), get<double>(a, "weight", "measure.atoms[]")});
    }
  }
  if (j.contains("segments")) {
    for (const auto& s : j.at("segments")) {
      const std::string where = "measure.segments[]";
      checkKeys(s, {"stratum", "coords", "lo", "hi", "density"}, where);
      Segment seg;
      seg.stratum = parseStratum(space, get<std::string>(s, "stratum", where));
      seg.coords = s.contains("coords") ? vec(get<std::vector<double>>(s, "coords", where)) : Eigen::VectorXd::Zero(space.coordDim());
      seg.lo = get<double>(s, "lo", where);
      seg.hi = get<double>(s, "hi", where);
      seg.density = get<double>(s, "density", where);
      segments.push_back(seg);
    }
  }
  Measure m(std::move(atoms), std::move(segments));
  m.validate(space);
  return m;
}

Json measureToJson(const SpaceModel& space, const Measure& m) {
  Json atoms = Json::array(), segments = Json::array();
  for (const auto& a : m.atoms())
    atoms.push_back({{"stratum", stratumName(space, a.point.stratum)}, {"coords", stdvec(a.point.coords)}, {"weight", a.weight}});
  for (const auto& s : m.segments())
    segments.push_back({{"stratum", stratumName(space, s.stratum)}, {"coords", stdvec(s.coords)}, {"lo", s.lo}, {"hi", s.hi}, {"density", s.density}});
  Json out{{"atoms", atoms}};
  if (!segments.empty()) out["segments"] = segments;
  return out;
}

TangentMeasure parseTangentMeasure(const TangentCone& cone, const Json& j) {
  checkKeys(j, {"atoms"}, "delta");
  TangentMeasure d;
  for (const auto& a : get<Json>(j, "atoms", "delta")) {
    checkKeys(a, {"chart", "coords", "weight"}, "delta.atoms[]");
    const auto coords = get<std::vector<double>>(a, "coords", "delta.atoms[]");
    if (static_cast<int>(coords.size()) != cone.ambientDim()) throw Error(ErrorCode::ConfigError, "delta.atoms[]: wrong coordinate count");
    d.add(cone.make(getOr<int>(a, "chart", 0, "delta.atoms[]"), vec(coords)), get<double>(a, "weight", "delta.atoms[]"));
  }
  return d;
}

ExperimentConfig parseConfig(const Json& j) {
  checkKeys(j, {"mode", "preset", "space", "measure", "nValues", "trials", "seed", "threads", "tolerances", "compare",
                "derivative", "conjecture", "inputs"},
            "config");
  ExperimentConfig c;
  if (j.contains("mode")) c.mode = parseMode(get<std::string>(j, "mode", "config"));
  if (j.contains("preset")) {
    if (j.contains("space") || j.contains("measure")) throw Error(ErrorCode::ConfigError, "config: give either a preset or space + measure");
    c.preset = get<std::string>(j, "preset", "config");
    const Preset p = preset(c.preset);
    c.space = p.space;
    c.measure = p.measure;
  } else {
    if (!j.contains("space") || !j.contains("measure")) throw Error(ErrorCode::ConfigError, "config: space and measure are required without a preset");
    c.space = parseSpace(j.at("space"));
    c.measure = parseMeasure(c.space, j.at("measure"));
  }
  c.nValues = getOr<std::vector<long>>(j, "nValues", c.nValues, "config");
  c.trials = getOr<std::size_t>(j, "trials", c.trials, "config");
  c.seed = getOr<std::uint64_t>(j, "seed", c.seed, "config");
  c.threads = getOr<int>(j, "threads", c.threads, "config");
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    const std::string w = "config.tolerances";
    checkKeys(t, {"mean", "sphere", "escape", "maxIterations", "quadratureNodes"}, w);
    c.tolerances.meanTolerance = getOr<double>(t, "mean", c.tolerances.meanTolerance, w);
    c.tolerances.sphereTolerance = getOr<double>(t, "sphere", c.tolerances.sphereTolerance, w);
    c.tolerances.escapeTolerance = getOr<double>(t, "escape", c.tolerances.escapeTolerance, w);
    c.tolerances.maxIterations = getOr<int>(t, "maxIterations", c.tolerances.maxIterations, w);
    c.tolerances.quadratureNodes = getOr<int>(t, "quadratureNodes", c.tolerances.quadratureNodes, w);
  }
  if (j.contains("compare")) {
    const Json& t = j.at("compare");
    const std::string w = "config.compare";
    checkKeys(t, {"permutations", "alpha", "maxRows", "probeDirections"}, w);
    c.compare.permutations = getOr<int>(t, "permutations", c.compare.permutations, w);
    c.compare.alpha = getOr<double>(t, "alpha", c.compare.alpha, w);
    c.compare.maxRows = getOr<std::size_t>(t, "maxRows", c.compare.maxRows, w);
    c.compare.probeDirections = getOr<int>(t, "probeDirections", c.compare.probeDirections, w);
  }
  if (j.contains("derivative")) {
    const Json& t = j.at("derivative");
    checkKeys(t, {"t", "directions"}, "config.derivative");
    c.derivative.t = getOr<std::vector<double>>(t, "t", c.derivative.t, "config.derivative");
    c.derivative.directions = getOr<int>(t, "directions", c.derivative.directions, "config.derivative");
  }
  if (j.contains("conjecture")) {
    const Json& t = j.at("conjecture");
    checkKeys(t, {"draws", "t"}, "config.conjecture");
    c.conjecture.draws = getOr<int>(t, "draws", c.conjecture.draws, "config.conjecture");
    c.conjecture.t = getOr<std::vector<double>>(t, "t", c.conjecture.t, "config.conjecture");
  }
  c.inputs = getOr<std::vector<std::string>>(j, "inputs", {}, "config");
  c.compare.seed = c.seed;

  if (c.nValues.empty()) throw Error(ErrorCode::ConfigError, "config: nValues is empty");
  for (std::size_t i = 0; i < c.nValues.size(); ++i) {
    if (c.nValues[i] < 16) throw Error(ErrorCode::ConfigError, "config: sample sizes below 16 are not supported");
    if (i > 0 && c.nValues[i] <= c.nValues[i - 1]) throw Error(ErrorCode::ConfigError, "config: nValues must be increasing");
  }
  if (c.trials == 0) throw Error(ErrorCode::ConfigError, "config: trials must be positive");
  if (c.mode == Mode::Compare && c.inputs.empty() && c.trials < 100) throw Error(ErrorCode::ConfigError, "config: compare needs at least 100 trials");
  if (!c.inputs.empty() && c.inputs.size() != 2) throw Error(ErrorCode::ConfigError, "config: inputs takes exactly two CSV paths");
  if (c.threads < 1) throw Error(ErrorCode::ConfigError, "config: threads must be at least 1");
  if (c.compare.permutations < 1) throw Error(ErrorCode::ConfigError, "config: permutations must be positive");
  if (!(c.compare.alpha > 0.0 && c.compare.alpha < 1.0)) throw Error(ErrorCode::ConfigError, "config: alpha must lie in (0, 1)");
  for (double t : c.derivative.t)
    if (!(t > 0.0)) throw Error(ErrorCode::ConfigError, "config: derivative t must be positive");
  for (double t : c.conjecture.t)
    if (!(t > 0.0)) throw Error(ErrorCode::ConfigError, "config: conjecture t must be positive");
  return c;
}

ExperimentConfig loadConfig(const std::string& path) { return parseConfig(readJsonFile(path)); }

Json configToJson(const ExperimentConfig& c) {
  Json j;
  j["mode"] = modeName(c.mode);
  if (!c.preset.empty()) {
    j["preset"] = c.preset;
  } else {
    j["space"] = spaceToJson(c.space);
    j["measure"] = measureToJson(c.space, c.measure);
  }
  j["nValues"] = c.nValues;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["tolerances"] = {{"mean", c.tolerances.meanTolerance},
                     {"sphere", c.tolerances.sphereTolerance},
                     {"escape", c.tolerances.escapeTolerance},
                     {"maxIterations", c.tolerances.maxIterations},
                     {"quadratureNodes", c.tolerances.quadratureNodes}};
  j["compare"] = {{"permutations", c.compare.permutations},
                  {"alpha", c.compare.alpha},
                  {"maxRows", c.compare.maxRows},
                  {"probeDirections", c.compare.probeDirections}};
  j["derivative"] = {{"t", c.derivative.t}, {"directions", c.derivative.directions}};
  j["conjecture"] = {{"draws", c.conjecture.draws}, {"t", c.conjecture.t}};
  if (!c.inputs.empty()) j["inputs"] = c.inputs;
  return j;
}

Json toJson(const SpaceModel& space, const Point& p) {
  return {{"stratum", stratumName(space, p.stratum)}, {"coords", stdvec(p.coords)}};
}

Json toJson(const TangentVector& v) {
  if (v.isApex) return {{"isApex", true}, {"radius", 0.0}};
  return {{"isApex", false}, {"chart", v.chart}, {"direction", stdvec(v.direction)}, {"radius", v.radius}};
}

Json toJson(const SpaceModel& space, const FrechetReport& r) {
  return {{"mean", toJson(space, r.mean)},
          {"value", r.value},
          {"iterations", r.iterations},
          {"gradientResidual", r.gradientResidual},
          {"localized", {{"uniqueMean", r.localized.uniqueMean}, {"convex", r.localized.convex}, {"logUnique", r.localized.logUnique}}},
          {"convexityConstant", r.convexityConstant},
          {"amenableProbe", r.amenableProbe},
          {"amenable", r.amenable},
          {"immured", r.immured},
          {"nonUniqueMean", r.nonUniqueMean},
          {"solver", r.solver},
          {"notes", r.notes}};
}

Json toJson(const EscapeResult& r) {
  return {{"vector", toJson(r.vector)}, {"direction", toJson(r.direction)}, {"objective", r.objective}, {"clippedToApex", r.clippedToApex}};
}

Json toJson(const TestReport& r) {
  Json ks = Json::array();
  for (std::size_t i = 0; i < r.ks.size(); ++i)
    ks.push_back({{"probe", toJson(r.probes[i])}, {"statistic", r.ks[i].statistic}, {"pValue", r.ks[i].pValue}});
  return {{"energy", {{"statistic", r.energy.statistic}, {"pValue", r.energy.pValue}}},
          {"ks", ks},
          {"apex", {{"fractionA", r.apexA}, {"fractionB", r.apexB}, {"z", r.apexZ}, {"pValue", r.apexP}}},
          {"alpha", r.alpha},
          {"pass", r.pass}};
}

Json toJson(const CollapseAxiomReport& r) {
  return {{"meanResidual", r.meanResidual},
          {"isometryResidual", r.isometryResidual},
          {"innerResidual", r.innerResidual},
          {"homogeneityResidual", r.homogeneityResidual},
          {"continuityModulus", r.continuityModulus},
          {"meanZero", r.meanZero},
          {"injective", r.injective},
          {"innerPreserved", r.innerPreserved},
          {"homogeneous", r.homogeneous},
          {"continuous", r.continuous}};
}

Json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

Json readJsonArgument(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("inline JSON: ") + e.what());
    }
  }
  return readJsonFile(text);
}

void writeTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  out << content;
}

} // namespace stratmean
