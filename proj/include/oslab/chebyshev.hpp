#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oslab/functions.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

/// sum_k coeffs[k] T_k(u), u = (2x - lo - hi) / (hi - lo). No halved T_0 term.
struct ChebyshevSeries {
  Interval interval{-1.0, 1.0};
  std::vector<double> coeffs;

  int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
  /// Clenshaw evaluation; also valid (as a polynomial) outside the interval.
  double operator()(double x) const;
  ChebyshevSeries derivative() const;
  /// Antiderivative vanishing at interval.lo.
  ChebyshevSeries antiderivative() const;
};

/// Interpolant at the degree+1 Chebyshev points of the first kind.
ChebyshevSeries chebyshev_interpolate(const std::function<double(double)>& f, Interval interval, int degree);

struct AdaptiveChebyshev {
  ChebyshevSeries series;
  bool converged = false;
};

/// Doubles the degree from 16 up to max_degree until the three trailing
/// coefficients fall below rel_tol times the largest one.
AdaptiveChebyshev chebyshev_adaptive(const std::function<double(double)>& f, Interval interval,
                                     double rel_tol = 1e-14, int max_degree = 128);

/// T_m(u(x)) integrated `times` times, each antiderivative vanishing at
/// interval.lo.
ChebyshevSeries chebyshev_basis_antiderivative(int m, int times, Interval interval);

/// Wraps a series as a polynomial SmoothFunction; derivative series are
/// precomputed up to the degree.
SmoothFunction chebyshev_function(const ChebyshevSeries& series, std::string name = "chebyshev");

}  // namespace oslab
