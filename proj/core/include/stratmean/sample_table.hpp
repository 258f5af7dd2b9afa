#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stratmean/tangent_cone.hpp"

namespace stratmean {

// One tangent vector per successful Monte Carlo trial, keyed by trial index.
struct SampleTable {
  std::string tag; // "empirical n=1600", "limit", ...
  std::uint64_t seed = 0;
  TangentCone cone;
  std::vector<std::uint64_t> trials;
  std::vector<TangentVector> rows;
  std::size_t failures = 0;

  std::size_t size() const noexcept { return rows.size(); }
  double apexFraction() const;
};

// CSV with columns trial,isApex,stratum,dir0..,radius and a leading "# tag=...;seed=...;failures=..." line.
// Doubles are written in shortest round-trip form, so reading back is bit-exact.
void writeCsv(std::ostream& os, const SampleTable& table);
std::string toCsv(const SampleTable& table);
SampleTable readCsv(std::istream& is, const TangentCone& cone);
SampleTable fromCsv(const std::string& text, const TangentCone& cone);

std::string formatDouble(double x);

} // namespace stratmean
