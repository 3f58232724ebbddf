#include "oslab/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "oslab/error.hpp"

namespace oslab {

double ChebyshevSeries::operator()(double x) const {
  if (coeffs.empty()) return 0.0;
  const double u = (2.0 * x - interval.lo - interval.hi) / interval.width();
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) {
    const double b0 = coeffs[k] + 2.0 * u * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs[0] + u * b1 - b2;
}

ChebyshevSeries ChebyshevSeries::derivative() const {
  ChebyshevSeries out{interval, {0.0}};
  const std::size_t n = coeffs.size();
  if (n <= 1) return out;
  std::vector<double> e(n + 1, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) e[k - 1] = e[k + 1] + 2.0 * static_cast<double>(k) * coeffs[k];
  const double scale = 2.0 / interval.width();
  out.coeffs.assign(n - 1, 0.0);
  out.coeffs[0] = 0.5 * e[0] * scale;
  for (std::size_t k = 1; k + 1 < n; ++k) out.coeffs[k] = e[k] * scale;
  return out;
}

ChebyshevSeries ChebyshevSeries::antiderivative() const {
  const std::size_t n = coeffs.size();
  auto c = [&](std::size_t k) { return k < n ? coeffs[k] : 0.0; };
  ChebyshevSeries out{interval, std::vector<double>(n + 1, 0.0)};
  const double scale = 0.5 * interval.width();
  out.coeffs[1] = (c(0) - 0.5 * c(2)) * scale;
  for (std::size_t k = 2; k <= n; ++k) {
    out.coeffs[k] = (c(k - 1) - c(k + 1)) / (2.0 * static_cast<double>(k)) * scale;
  }
  double at_lo = 0.0;
  for (std::size_t k = 1; k <= n; ++k) at_lo += (k % 2 ? -1.0 : 1.0) * out.coeffs[k];
  out.coeffs[0] = -at_lo;
  return out;
}

ChebyshevSeries chebyshev_interpolate(const std::function<double(double)>& f, Interval interval, int degree) {
  if (degree < 0) throw InvalidArgument("chebyshev_interpolate: negative degree");
  if (!(interval.width() > 0.0)) throw InvalidArgument("chebyshev_interpolate: empty interval");
  const int n = degree + 1;
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / n;
    values[static_cast<std::size_t>(j)] = f(interval.midpoint() + 0.5 * interval.width() * std::cos(theta));
  }
  ChebyshevSeries out{interval, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += values[static_cast<std::size_t>(j)] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
    out.coeffs[static_cast<std::size_t>(k)] = (k == 0 ? 1.0 : 2.0) * s / n;
  }
  return out;
}

AdaptiveChebyshev chebyshev_adaptive(const std::function<double(double)>& f, Interval interval, double rel_tol,
                                     int max_degree) {
  AdaptiveChebyshev out;
  for (int degree = 16;; degree *= 2) {
    degree = std::min(degree, max_degree);
    out.series = chebyshev_interpolate(f, interval, degree);
    const auto& c = out.series.coeffs;
    double largest = 0.0;
    for (double v : c) largest = std::max(largest, std::abs(v));
    double trailing = 0.0;
    for (std::size_t k = c.size() >= 3 ? c.size() - 3 : 0; k < c.size(); ++k) trailing = std::max(trailing, std::abs(c[k]));
    if (trailing <= rel_tol * largest) {
      out.converged = true;
      return out;
    }
    if (degree >= max_degree) return out;
  }
}

ChebyshevSeries chebyshev_basis_antiderivative(int m, int times, Interval interval) {
  if (m < 0 || times < 0) throw InvalidArgument("chebyshev_basis_antiderivative: negative index");
  ChebyshevSeries s{interval, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0)};
  s.coeffs.back() = 1.0;
  for (int i = 0; i < times; ++i) s = s.antiderivative();
  return s;
}

SmoothFunction chebyshev_function(const ChebyshevSeries& series, std::string name) {
  auto derivs = std::make_shared<std::vector<ChebyshevSeries>>();
  derivs->push_back(series);
  for (int k = 0; k < series.degree(); ++k) derivs->push_back(derivs->back().derivative());

  SmoothFunction f;
  f.name = std::move(name);
  f.params = {{"lo", series.interval.lo}, {"hi", series.interval.hi}, {"coefficients", series.coeffs}};
  f.max_order = kUnlimitedOrder;
  f.taylor = [derivs](double x, std::span<double> out) {
    double fact = 1.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (k > 0) fact *= static_cast<double>(k);
      out[k] = k < derivs->size() ? (*derivs)[k](x) / fact : 0.0;
    }
  };
  return f;
}

}  // namespace oslab
