#pragma once

#include <Eigen/Dense>

namespace stratmean {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0.0;
  int iterations = 0;
};

// Lawson-Hanson active set: min |A x - b| subject to x >= 0. The passive columns stay linearly
// independent, so the support never exceeds rank(A).
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int maxIterations = 0);

} // namespace stratmean
