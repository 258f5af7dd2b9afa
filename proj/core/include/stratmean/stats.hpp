#pragma once

#include <cstdint>
#include <vector>

#include "stratmean/sample_table.hpp"

namespace stratmean {

struct CompareOptions {
  int permutations = 200;
  double alpha = 0.01;
  // Rows beyond this per table are ignored by the energy test (the pooled distance matrix is quadratic).
  std::size_t maxRows = 1000;
  int probeDirections = 8;
  std::uint64_t seed = 1;
};

struct EnergyTest {
  double statistic = 0.0; // n m / (n + m) times the energy distance
  double pValue = 1.0;
};

struct KsTest {
  double statistic = 0.0;
  double pValue = 1.0;
};

struct TestReport {
  EnergyTest energy;
  std::vector<TangentVector> probes;
  std::vector<KsTest> ks;
  double apexA = 0.0;
  double apexB = 0.0;
  double apexZ = 0.0;
  double apexP = 1.0;
  double alpha = 0.01;
  bool pass = true; // energy p-value above alpha
};

double energyDistance(const TangentCone& cone, const std::vector<TangentVector>& a, const std::vector<TangentVector>& b);
EnergyTest energyTest(const TangentCone& cone, const std::vector<TangentVector>& a, const std::vector<TangentVector>& b,
                      int permutations, std::uint64_t seed);

// Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorovQ(double x);
KsTest ksTest(std::vector<double> a, std::vector<double> b);

// Two-sided pooled two-proportion z-test; returns {z, p}.
std::pair<double, double> proportionTest(std::size_t hitsA, std::size_t nA, std::size_t hitsB, std::size_t nB);

TestReport compareTables(const SampleTable& a, const SampleTable& b, const CompareOptions& opts = {});

struct MomentSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Mean and (n-1)-normalized covariance of chart coordinates; meaningful on linear cones.
MomentSummary coordinateMoments(const TangentCone& cone, const std::vector<TangentVector>& rows);

} // namespace stratmean
