#include "stratmean/stats.hpp"

#include <algorithm>
#include <cmath>

#include "stratmean/errors.hpp"
#include "stratmean/rng.hpp"

namespace stratmean {

namespace {

std::vector<TangentVector> head(const std::vector<TangentVector>& rows, std::size_t cap) {
  return {rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(cap, rows.size()))};
}

// statistic from the pooled distance matrix for the labelling x (1 = first sample)
double energyFromLabels(const Eigen::MatrixXd& d, const Eigen::VectorXd& x, double n, double m) {
  const Eigen::VectorXd dx = d * x;
  const double total = d.sum();
  const double aa = x.dot(dx);
  const double ab = dx.sum() - aa;
  const double bb = total - 2.0 * ab - aa;
  const double e = 2.0 * ab / (n * m) - aa / (n * n) - bb / (m * m);
  return n * m / (n + m) * e;
}

} // namespace

double energyDistance(const TangentCone& cone, const std::vector<TangentVector>& a, const std::vector<TangentVector>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "energy distance of an empty sample");
  auto meanDist = [&](const std::vector<TangentVector>& p, const std::vector<TangentVector>& q) {
    double s = 0.0;
    for (const auto& x : p)
      for (const auto& y : q) s += cone.distance(x, y);
    return s / (static_cast<double>(p.size()) * static_cast<double>(q.size()));
  };
  return 2.0 * meanDist(a, b) - meanDist(a, a) - meanDist(b, b);
}

EnergyTest energyTest(const TangentCone& cone, const std::vector<TangentVector>& a, const std::vector<TangentVector>& b,
                      int permutations, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "energy test on an empty sample");
  const std::size_t n = a.size(), m = b.size(), total = n + m;
  std::vector<const TangentVector*> pooled;
  for (const auto& v : a) pooled.push_back(&v);
  for (const auto& v : b) pooled.push_back(&v);
  Eigen::MatrixXd d(total, total);
  for (std::size_t i = 0; i < total; ++i) {
    d(i, i) = 0.0;
    for (std::size_t j = i + 1; j < total; ++j) d(i, j) = d(j, i) = cone.distance(*pooled[i], *pooled[j]);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(total);
  x.head(n).setOnes();
  EnergyTest out;
  // Tiny negative values are rounding; the population statistic is nonnegative.
  out.statistic = std::max(0.0, energyFromLabels(d, x, n, m));
  RngStream rng(seed, 0xe7e7);
  std::vector<std::size_t> idx(total);
  int exceed = 0;
  const double slack = 1e-12 * (1.0 + std::abs(out.statistic));
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    for (std::size_t k = total; k > 1; --k) std::swap(idx[k - 1], idx[rng.nextU64() % k]);
    x.setZero();
    for (std::size_t i = 0; i < n; ++i) x[idx[i]] = 1.0;
    if (energyFromLabels(d, x, n, m) >= out.statistic - slack) ++exceed;
  }
  out.pValue = (1.0 + exceed) / (1.0 + permutations);
  return out;
}

double kolmogorovQ(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.27) return 1.0; // the series is 1 to double precision here
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsTest ksTest(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "KS test on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double dmax = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    dmax = std::max(dmax, std::abs(i / n - j / m));
  }
  KsTest t;
  t.statistic = dmax;
  const double ne = std::sqrt(n * m / (n + m));
  t.pValue = kolmogorovQ((ne + 0.12 + 0.11 / ne) * dmax);
  return t;
}

std::pair<double, double> proportionTest(std::size_t hitsA, std::size_t nA, std::size_t hitsB, std::size_t nB) {
  if (nA == 0 || nB == 0) throw Error(ErrorCode::InvalidArgument, "proportion test on an empty sample");
  const double pa = static_cast<double>(hitsA) / nA, pb = static_cast<double>(hitsB) / nB;
  const double pool = static_cast<double>(hitsA + hitsB) / (nA + nB);
  const double se = std::sqrt(pool * (1.0 - pool) * (1.0 / nA + 1.0 / nB));
  if (se == 0.0) return {0.0, pa == pb ? 1.0 : 0.0};
  const double z = (pa - pb) / se;
  return {z, std::erfc(std::abs(z) / std::sqrt(2.0))};
}

TestReport compareTables(const SampleTable& a, const SampleTable& b, const CompareOptions& opts) {
  if (!(a.cone == b.cone)) throw Error(ErrorCode::MismatchedSpaces, "tables live on different tangent cones");
  TestReport r;
  r.alpha = opts.alpha;
  r.energy = energyTest(a.cone, head(a.rows, opts.maxRows), head(b.rows, opts.maxRows), opts.permutations, opts.seed);
  RngStream rng(opts.seed, 0x9b0be);
  for (int k = 0; k < opts.probeDirections; ++k) {
    const TangentVector theta = a.cone.randomUnit(rng);
    std::vector<double> pa, pb;
    for (const auto& v : a.rows) pa.push_back(a.cone.inner(v, theta));
    for (const auto& v : b.rows) pb.push_back(b.cone.inner(v, theta));
    r.probes.push_back(theta);
    r.ks.push_back(ksTest(pa, pb));
  }
  std::size_t ha = 0, hb = 0;
  for (const auto& v : a.rows) ha += v.isApex;
  for (const auto& v : b.rows) hb += v.isApex;
  r.apexA = a.apexFraction();
  r.apexB = b.apexFraction();
  std::tie(r.apexZ, r.apexP) = proportionTest(ha, a.size(), hb, b.size());
  r.pass = r.energy.pValue > opts.alpha;
  return r;
}

MomentSummary coordinateMoments(const TangentCone& cone, const std::vector<TangentVector>& rows) {
  const int d = cone.ambientDim();
  MomentSummary s;
  s.mean = Eigen::VectorXd::Zero(d);
  s.covariance = Eigen::MatrixXd::Zero(d, d);
  if (rows.empty()) return s;
  for (const auto& v : rows) s.mean += cone.coords(v);
  s.mean /= static_cast<double>(rows.size());
  for (const auto& v : rows) {
    const Eigen::VectorXd c = cone.coords(v) - s.mean;
    s.covariance += c * c.transpose();
  }
  if (rows.size() > 1) s.covariance /= static_cast<double>(rows.size() - 1);
  return s;
}

} // namespace stratmean
