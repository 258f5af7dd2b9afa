#include "stratmean/sample_table.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

double parseDouble(const std::string& s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(ErrorCode::ConfigError, "bad number in CSV: " + s);
  return x;
}

std::uint64_t parseUnsigned(const std::string& s) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(ErrorCode::ConfigError, "bad integer in CSV: " + s);
  return x;
}

std::vector<std::string> splitOn(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

} // namespace

std::string formatDouble(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double SampleTable::apexFraction() const {
  if (rows.empty()) return 0.0;
  std::size_t k = 0;
  for (const auto& r : rows) k += r.isApex ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(rows.size());
}

void writeCsv(std::ostream& os, const SampleTable& table) {
  const int d = table.cone.ambientDim();
  os << "# tag=" << table.tag << ";seed=" << table.seed << ";failures=" << table.failures << '\n';
  os << "trial,isApex,stratum";
  for (int i = 0; i < d; ++i) os << ",dir" << i;
  os << ",radius\n";
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const TangentVector& v = table.rows[k];
    os << table.trials[k] << ',' << (v.isApex ? 1 : 0) << ',' << v.chart;
    for (int i = 0; i < d; ++i) os << ',' << (v.isApex ? "0" : formatDouble(v.direction[i]));
    os << ',' << formatDouble(v.radius) << '\n';
  }
}

std::string toCsv(const SampleTable& table) {
  std::ostringstream os;
  writeCsv(os, table);
  return os.str();
}

SampleTable readCsv(std::istream& is, const TangentCone& cone) {
  SampleTable t;
  t.cone = cone;
  const int d = cone.ambientDim();
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw Error(ErrorCode::ConfigError, "CSV metadata line missing");
  for (const auto& field : splitOn(line.substr(2), ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "tag") t.tag = value;
    else if (key == "seed") t.seed = parseUnsigned(value);
    else if (key == "failures") t.failures = parseUnsigned(value);
  }
  if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "CSV header missing");
  if (static_cast<int>(splitOn(line, ',').size()) != d + 4) throw Error(ErrorCode::MismatchedSpaces, "CSV width does not match the cone");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = splitOn(line, ',');
    if (static_cast<int>(cells.size()) != d + 4) throw Error(ErrorCode::ConfigError, "ragged CSV row");
    t.trials.push_back(parseUnsigned(cells[0]));
    TangentVector v;
    v.isApex = cells[1] == "1";
    if (!v.isApex) {
      v.chart = static_cast<int>(parseUnsigned(cells[2]));
      v.direction.resize(d);
      for (int i = 0; i < d; ++i) v.direction[i] = parseDouble(cells[3 + i]);
      v.radius = parseDouble(cells[3 + d]);
      cone.validate(v);
    }
    t.rows.push_back(v);
  }
  return t;
}

SampleTable fromCsv(const std::string& text, const TangentCone& cone) {
  std::istringstream is(text);
  return readCsv(is, cone);
}

} // namespace stratmean
