#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "oslab/functions.hpp"
#include "oslab/sign.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

/// Tr R_n(g, H, V) for many functions g and a fixed pair (H, V).
///
/// The trace of every Taylor term is a closed cycle over eigen-indices of H,
/// so it is a weighted sum of divided differences over index multisets. The
/// weights are computed once; each g then costs one divided difference per
/// multiset plus n+1 point values. Multisets grow like C(d+k, k+1).
class RemainderTraceExpansion {
 public:
  RemainderTraceExpansion(const SymmetricOperator& h, const SymmetricOperator& v, int n);

  int order() const noexcept { return n_; }
  /// Tr R_n(g). g must provide divided differences of order n-1.
  double operator()(const SmoothFunction& g) const;
  /// N_n(lambda) = Tr R_n(f_lambda), f_lambda(x) = (x - lambda)_+^n / n!.
  double cdf(double lambda) const;
  /// Convex hull of spec(H) and spec(H + V).
  Interval hull() const noexcept { return hull_; }

 private:
  struct Term {
    std::vector<double> nodes;
    double weight;
  };
  int n_;
  bool zero_perturbation_ = false;
  std::vector<double> perturbed_eigenvalues_;
  std::vector<Term> terms_;
  Interval hull_;
};

enum class SSFSign { nonneg, nonpos, indefinite };
const char* to_string(SSFSign s) noexcept;

struct SSFEstimate {
  int order = 0;
  std::vector<double> grid;
  /// N_n(lambda) = int_lambda^inf eta_n
  std::vector<double> cdf;
  std::vector<double> density;
  Interval hull;
  /// Observed sign of the density at tolerance 1e-8 max|eta|.
  SSFSign verdict = SSFSign::indefinite;
  /// min(eta) / max|eta| for nonneg and indefinite, -max(eta) / max|eta| for nonpos.
  double margin = 0.0;

  double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

double ssf_cdf(const SymmetricOperator& h, const SymmetricOperator& v, int n, double lambda);

/// Uniform grid of grid_size points over the hull widened by 5% on each side.
SSFEstimate ssf_density(const SymmetricOperator& h, const SymmetricOperator& v, int n, int grid_size);

/// Same estimator on a caller-supplied uniform grid.
SSFEstimate ssf_density_on_grid(const SymmetricOperator& h, const SymmetricOperator& v, int n,
                                const std::vector<double>& grid);

/// int lambda^m eta_n for m = 0..m_max, from Tr R_n(x^{m+n} m!/(m+n)!).
std::vector<double> ssf_moments(const SymmetricOperator& h, const SymmetricOperator& v, int n, int m_max);

/// int T_m(u(lambda)) eta_n for m = 0..m_max, where u maps `interval` onto
/// [-1, 1]; computed from the n-fold antiderivatives of T_m. The interval must
/// contain the hull.
std::vector<double> ssf_chebyshev_moments(const SymmetricOperator& h, const SymmetricOperator& v, int n, int m_max,
                                          Interval interval);

struct MomentIntegral {
  double value = 0.0;
  int degree = 0;
  bool converged = false;
};

/// int f^(n) eta_n through a Chebyshev interpolant of f^(n) on the hull
/// (adaptive degree up to max_degree) and the Chebyshev moments of eta_n.
MomentIntegral ssf_moment_integral(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                                   int n, int max_degree = 128);

/// Trapezoid rule for int f^(n) eta_n on the estimate grid.
double ssf_grid_integral(const SmoothFunction& f, const SSFEstimate& est);

/// Trapezoid rule for int eta_n.
double ssf_mass(const SSFEstimate& est);

struct PositivityVerdict {
  SignExpectation expected = SignExpectation::none;
  bool pass = true;
  /// Informational only when nothing is expected.
  bool asserted = false;
  double worst_margin = 0.0;
};

/// n even: nonneg; n odd: nonneg for PSD V, nonpos for NSD V, no claim
/// otherwise.
PositivityVerdict positivity_verdict(const SSFEstimate& est, SignClass v_sign, int n, double rel_tol = 1e-8);

/// Columns lambda, cdf, density, order, seed; 17 significant digits.
void write_ssf_csv(std::ostream& out, const SSFEstimate& est, std::uint64_t seed);

}  // namespace oslab
