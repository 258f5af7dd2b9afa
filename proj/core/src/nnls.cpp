#include "stratmean/nnls.hpp"

#include <limits>
#include <vector>

#include "stratmean/errors.hpp"

namespace stratmean {

namespace {

Eigen::VectorXd solvePassive(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (passive[j]) idx.push_back(j);
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
  const Eigen::VectorXd s = sub.colPivHouseholderQr().solve(b);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = s[static_cast<Eigen::Index>(k)];
  return z;
}

} // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int maxIterations) {
  if (a.rows() != b.size()) throw Error(ErrorCode::InvalidArgument, "nnls: dimension mismatch");
  const Eigen::Index n = a.cols();
  if (maxIterations <= 0) maxIterations = static_cast<int>(3 * n + 10);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.norm() * std::max<Eigen::Index>(a.rows(), n);
  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  Eigen::VectorXd w = a.transpose() * (b - a * out.x);
  while (out.iterations < maxIterations) {
    Eigen::Index best = -1;
    double bestW = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w[j] > bestW) {
        bestW = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;
    ++out.iterations;
    for (;;) {
      Eigen::VectorXd z = solvePassive(a, b, passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) {
        out.x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, out.x[j] / (out.x[j] - z[j]));
      out.x += alpha * (z - out.x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && out.x[j] <= tol) {
          passive[j] = false;
          out.x[j] = 0.0;
        }
    }
    w = a.transpose() * (b - a * out.x);
  }
  out.residual = (a * out.x - b).norm();
  return out;
}

} // namespace stratmean
