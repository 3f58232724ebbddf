#pragma once

#include <vector>

#include "oslab/functions.hpp"
#include "oslab/matrix.hpp"
#include "oslab/quadrature.hpp"
#include "oslab/sign.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

/// d^k/dt^k f(H + tV) at t = s, i.e. k! T^{(H+sV)^{k+1}}_{f^[k]}(V,...,V).
/// k = 0 gives f(H + sV).
Matrix operator_derivative(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v, int k,
                           double s);

/// Default step eps^{1/(k+6)} / max(1, ||V||): the Richardson level lifts the
/// stencil to sixth order, which moves the truncation/rounding balance.
double default_fd_step(int k, const SymmetricOperator& v);

/// Central difference of derivative order k and accuracy order 4 applied to
/// t -> f(H + tV) at t = s with step h, followed by one Richardson level
/// (h, h/2) when `richardson` is set.
Matrix finite_difference_oracle(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                                int k, double s, double step, bool richardson = true);

/// Central-difference weights w_{-m..m} with sum_j w_j j^q = q! [q == k],
/// m = floor((k + 3) / 2).
std::vector<double> central_difference_weights(int k);

/// psi(s) = Tr d^n/ds^n f(H + sV), contracted without forming the matrix.
double derivative_trace(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v, int n,
                        double s);

/// f(H + V) - sum_{k<n} (1/k!) d^k/dt^k f(H + tV)|_{t=0}.
Matrix taylor_remainder_direct(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                               int n);
double taylor_remainder_direct_trace(const SmoothFunction& f, const SymmetricOperator& h,
                                     const SymmetricOperator& v, int n);

/// T^{H,H+V,H,...,H}_{f^[n-1]}(V,...,V) - T^{H,...,H}_{f^[n-1]}(V,...,V), n >= 2.
/// n = 1 is rejected; use first_order_remainder.
Matrix taylor_remainder_via_perturbation(const SmoothFunction& f, const SymmetricOperator& h,
                                         const SymmetricOperator& v, int n);
double taylor_remainder_via_perturbation_trace(const SmoothFunction& f, const SymmetricOperator& h,
                                               const SymmetricOperator& v, int n);

/// T^{H,H+V}_{f^[1]}(V) = f(H + V) - f(H).
Matrix first_order_remainder(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v);

/// (1/(n-1)!) int_0^1 (1-s)^{n-1} psi(s) ds by Gauss-Legendre doubling.
QuadratureResult remainder_trace_integral(const SmoothFunction& f, const SymmetricOperator& h,
                                          const SymmetricOperator& v, int n, double quad_tol);

/// Sign pattern of s -> d^k/ds^k Tr (H + sV - lambda)^p.
struct PowerSignReport {
  double p = 0.0;
  double lambda = 0.0;
  int k = 0;
  std::vector<double> s_grid;
  std::vector<double> values;
  /// False for integer p with lambda >= lambda_min(H): the statement then
  /// carries no claim and the checks are informational.
  bool hypotheses_hold = true;
  /// Which of the three patterns apply: (i) p > 0, k <= ceil(p): values >= 0;
  /// (ii) p > 0, k >= ceil(p): (-1)^{k - ceil p} values >= 0;
  /// (iii) p < 0: (-1)^k values >= 0.
  bool case_i = false;
  bool case_ii = false;
  bool case_iii = false;
  bool pass = true;
  /// Worst sign-adjusted value relative to max |value| over applicable cases.
  double worst_margin = 0.0;
  double tolerance = 0.0;
};

/// Requires V PSD and, for non-integer or negative p, lambda < lambda_min(H).
PowerSignReport power_sign_report(const SymmetricOperator& h, const SymmetricOperator& v, double p, double lambda,
                                  int k, const std::vector<double>& s_grid, double rel_tol = 1e-8);

struct DerivativeTraceSignReport {
  int n = 0;
  std::vector<double> s_grid;
  std::vector<double> values;
  /// f^(n) >= 0 on the spectral hull of H + sV over the grid.
  bool hypothesis_holds = false;
  SignClass v_sign = SignClass::indefinite;
  SignCheck check;
};

/// psi on the s-grid together with the expected sign pattern: n even gives
/// psi >= 0; n odd gives psi >= 0 for PSD V and psi <= 0 for NSD V.
DerivativeTraceSignReport derivative_trace_sign_check(const SmoothFunction& f, const SymmetricOperator& h,
                                                      const SymmetricOperator& v, int n,
                                                      const std::vector<double>& s_grid, double rel_tol = 1e-8);

}  // namespace oslab
