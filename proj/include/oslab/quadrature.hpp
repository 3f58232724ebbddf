#pragma once

#include <functional>
#include <vector>

namespace oslab {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Newton iteration on P_n from the Chebyshev-like initial guesses.
GaussLegendreRule gauss_legendre(int points);

double integrate(const std::function<double(double)>& f, double a, double b, const GaussLegendreRule& rule);

struct QuadratureResult {
  double value = 0.0;
  int points = 0;
  /// |Q_{2N} - Q_N| at acceptance.
  double last_difference = 0.0;
};

/// Gauss-Legendre with 8, 16, 32, ... points until two successive values
/// differ by less than tol. Throws ConvergenceError carrying the last two
/// values after `max_doublings` doublings.
QuadratureResult integrate_doubling(const std::function<double(double)>& f, double a, double b, double tol,
                                    int start_points = 8, int max_doublings = 10);

}  // namespace oslab
