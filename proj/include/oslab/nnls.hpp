#pragma once

#include <vector>

#include "oslab/matrix.hpp"

namespace oslab {

struct NnlsResult {
  std::vector<double> x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set). Columns
/// are scaled to unit norm internally. Throws ConvergenceError with the
/// residual-norm history after max_iterations outer steps (default 3 * cols).
NnlsResult nnls(const Matrix& a, const std::vector<double>& b, int max_iterations = 0);

/// Unconstrained least squares by Householder QR. Requires rows >= cols.
std::vector<double> least_squares(const Matrix& a, const std::vector<double>& b);

}  // namespace oslab
