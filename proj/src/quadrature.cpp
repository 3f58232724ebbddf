#include "oslab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "oslab/error.hpp"

namespace oslab {

GaussLegendreRule gauss_legendre(int points) {
  if (points < 1) throw InvalidArgument("Gauss-Legendre rule needs at least one point");
  const int n = points;
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, const GaussLegendreRule& rule) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * s;
}

QuadratureResult integrate_doubling(const std::function<double(double)>& f, double a, double b, double tol,
                                    int start_points, int max_doublings) {
  if (!(tol > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
  int points = start_points;
  double previous = integrate(f, a, b, gauss_legendre(points));
  for (int d = 0; d < max_doublings; ++d) {
    points *= 2;
    const double current = integrate(f, a, b, gauss_legendre(points));
    const double diff = std::abs(current - previous);
    if (diff < tol) return {current, points, diff};
    if (d + 1 == max_doublings) {
      throw ConvergenceError("Gauss-Legendre doubling did not converge after " + std::to_string(max_doublings) +
                                 " doublings",
                             {previous, current});
    }
    previous = current;
  }
  throw ConvergenceError("Gauss-Legendre doubling: no doublings allowed", {previous});
}

}  // namespace oslab
