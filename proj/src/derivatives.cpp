#include "oslab/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oslab/error.hpp"
#include "oslab/moi.hpp"

namespace oslab {

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

void check_pair(const SymmetricOperator& h, const SymmetricOperator& v) {
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
}

}  // namespace

Matrix operator_derivative(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v, int k,
                           double s) {
  check_pair(h, v);
  if (k < 0) throw InvalidArgument("derivative order must be non-negative");
  const SymmetricOperator base = shifted(h, v, s);
  Matrix m = moi_evaluate(uniform_problem(f, base, v.entries(), k));
  m *= factorial(k);
  return m;
}

double default_fd_step(int k, const SymmetricOperator& v) {
  return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 6)) / std::max(1.0, v.norm());
}

std::vector<double> central_difference_weights(int k) {
  if (k < 1) throw InvalidArgument("finite differences need k >= 1");
  const int m = (k + 3) / 2;
  const int size = 2 * m + 1;
  Matrix a(static_cast<std::size_t>(size), static_cast<std::size_t>(size));
  std::vector<double> rhs(static_cast<std::size_t>(size), 0.0);
  for (int q = 0; q < size; ++q) {
    for (int j = -m; j <= m; ++j) a(static_cast<std::size_t>(q), static_cast<std::size_t>(j + m)) = std::pow(j, q);
  }
  rhs[static_cast<std::size_t>(k)] = factorial(k);
  return solve_linear(a, rhs);
}

Matrix finite_difference_oracle(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                                int k, double s, double step, bool richardson) {
  check_pair(h, v);
  if (!(step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (k == 0) return apply_function(shifted(h, v, s), f).entries();
  const std::vector<double> w = central_difference_weights(k);
  const int m = static_cast<int>(w.size() / 2);
  auto stencil = [&](double hh) {
    Matrix acc(h.dim(), h.dim());
    for (int j = -m; j <= m; ++j) {
      const double wj = w[static_cast<std::size_t>(j + m)];
      if (wj == 0.0) continue;
      acc += wj * apply_function(SymmetricOperator(h.entries() + (s + j * hh) * v.entries()), f).entries();
    }
    acc *= 1.0 / std::pow(hh, k);
    return acc;
  };
  Matrix coarse = stencil(step);
  if (!richardson) return coarse;
  Matrix fine = stencil(0.5 * step);
  return (16.0 * fine - coarse) * (1.0 / 15.0);
}

double derivative_trace(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v, int n,
                        double s) {
  check_pair(h, v);
  if (n < 0) throw InvalidArgument("derivative order must be non-negative");
  return factorial(n) * moi_trace(uniform_problem(f, shifted(h, v, s), v.entries(), n));
}

Matrix taylor_remainder_direct(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                               int n) {
  check_pair(h, v);
  if (n < 1) throw InvalidArgument("Taylor remainder needs n >= 1");
  Matrix r = apply_function(h + v, f).entries();
  for (int k = 0; k < n; ++k) r -= moi_evaluate(uniform_problem(f, h, v.entries(), k));
  return r;
}

double taylor_remainder_direct_trace(const SmoothFunction& f, const SymmetricOperator& h,
                                     const SymmetricOperator& v, int n) {
  check_pair(h, v);
  if (n < 1) throw InvalidArgument("Taylor remainder needs n >= 1");
  double t = trace(apply_function(h + v, f));
  for (int k = 0; k < n; ++k) t -= moi_trace(uniform_problem(f, h, v.entries(), k));
  return t;
}

namespace {

MoiProblem perturbed_problem(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v, int n) {
  MoiProblem p = uniform_problem(f, h, v.entries(), n - 1);
  p.bases[1] = h + v;
  return p;
}

void check_perturbation_order(int n) {
  if (n < 2) {
    throw InvalidArgument("perturbation form of the remainder needs n >= 2; use first_order_remainder for n = 1");
  }
}

}  // namespace

Matrix taylor_remainder_via_perturbation(const SmoothFunction& f, const SymmetricOperator& h,
                                         const SymmetricOperator& v, int n) {
  check_pair(h, v);
  check_perturbation_order(n);
  return moi_evaluate(perturbed_problem(f, h, v, n)) - moi_evaluate(uniform_problem(f, h, v.entries(), n - 1));
}

double taylor_remainder_via_perturbation_trace(const SmoothFunction& f, const SymmetricOperator& h,
                                               const SymmetricOperator& v, int n) {
  check_pair(h, v);
  check_perturbation_order(n);
  return moi_trace(perturbed_problem(f, h, v, n)) - moi_trace(uniform_problem(f, h, v.entries(), n - 1));
}

Matrix first_order_remainder(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v) {
  check_pair(h, v);
  MoiProblem p{{h, h + v}, {v.entries()}, f};
  return moi_evaluate(p);
}

QuadratureResult remainder_trace_integral(const SmoothFunction& f, const SymmetricOperator& h,
                                          const SymmetricOperator& v, int n, double quad_tol) {
  check_pair(h, v);
  if (n < 1) throw InvalidArgument("Taylor remainder needs n >= 1");
  const double norm = 1.0 / factorial(n - 1);
  auto integrand = [&](double s) { return norm * std::pow(1.0 - s, n - 1) * derivative_trace(f, h, v, n, s); };
  return integrate_doubling(integrand, 0.0, 1.0, quad_tol);
}

PowerSignReport power_sign_report(const SymmetricOperator& h, const SymmetricOperator& v, double p, double lambda,
                                  int k, const std::vector<double>& s_grid, double rel_tol) {
  check_pair(h, v);
  if (k < 1) throw InvalidArgument("power_sign_report: k must be >= 1");
  if (s_grid.empty()) throw InvalidArgument("power_sign_report: empty s-grid");
  if (sign_class(v) != SignClass::psd) throw InvalidArgument("power_sign_report: V must be PSD");
  const bool natural = p >= 0.0 && p == std::floor(p);
  const double lmin = h.min_eigenvalue();
  if (!natural && !(lambda < lmin)) {
    throw InvalidArgument("power_sign_report: lambda must lie below lambda_min(H) for non-integer or negative p");
  }
  for (double s : s_grid)
    if (s < 0.0) throw InvalidArgument("power_sign_report: s-grid must be non-negative");

  PowerSignReport r;
  r.p = p;
  r.lambda = lambda;
  r.k = k;
  r.s_grid = s_grid;
  r.hypotheses_hold = lambda < lmin;
  const SmoothFunction f = shifted_power(p, lambda);
  for (double s : s_grid) r.values.push_back(derivative_trace(f, h, v, k, s));

  double max_abs = 0.0;
  for (double x : r.values) max_abs = std::max(max_abs, std::abs(x));
  r.tolerance = std::max(rel_tol * max_abs, 1e-12);
  const int ceil_p = static_cast<int>(std::ceil(p));
  r.case_i = p > 0.0 && k <= ceil_p;
  r.case_ii = p > 0.0 && k >= ceil_p;
  r.case_iii = p < 0.0;

  double worst = std::numeric_limits<double>::infinity();
  auto apply = [&](double orientation) {
    for (double x : r.values) worst = std::min(worst, orientation * x);
  };
  if (r.case_i) apply(1.0);
  if (r.case_ii) apply((k - ceil_p) % 2 == 0 ? 1.0 : -1.0);
  if (r.case_iii) apply(k % 2 == 0 ? 1.0 : -1.0);
  if (std::isinf(worst)) worst = 0.0;
  r.worst_margin = max_abs > 0.0 ? worst / max_abs : 0.0;
  r.pass = !r.hypotheses_hold || worst >= -r.tolerance;
  return r;
}

DerivativeTraceSignReport derivative_trace_sign_check(const SmoothFunction& f, const SymmetricOperator& h,
                                                      const SymmetricOperator& v, int n,
                                                      const std::vector<double>& s_grid, double rel_tol) {
  check_pair(h, v);
  if (n < 1) throw InvalidArgument("derivative order must be >= 1");
  if (s_grid.empty()) throw InvalidArgument("derivative_trace_sign_check: empty s-grid");
  DerivativeTraceSignReport r;
  r.n = n;
  r.s_grid = s_grid;
  r.v_sign = sign_class(v);

  Interval hull{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double s : s_grid) {
    const SymmetricOperator hs = shifted(h, v, s);
    hull.lo = std::min(hull.lo, hs.min_eigenvalue());
    hull.hi = std::max(hull.hi, hs.max_eigenvalue());
    r.values.push_back(derivative_trace(f, h, v, n, s));
  }
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = hull.lo + hull.width() * i / 200.0;
    const double d = f.derivative(x, n);
    fmin = std::min(fmin, d);
    fmax = std::max(fmax, std::abs(d));
  }
  r.hypothesis_holds = fmin >= -1e-12 * fmax;
  r.check = check_sign(r.values, r.hypothesis_holds ? expected_sign(n, r.v_sign) : SignExpectation::none, rel_tol);
  return r;
}

}  // namespace oslab
