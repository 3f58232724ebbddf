#pragma once

#include <vector>

#include "oslab/functions.hpp"
#include "oslab/matrix.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

/// T^{H_0,...,H_n}_{f^[n]}(V_1,...,V_n) with n = perturbations.size().
/// Order 0 is allowed and means f(H_0).
struct MoiProblem {
  std::vector<SymmetricOperator> bases;
  std::vector<Matrix> perturbations;
  SmoothFunction symbol;

  int order() const noexcept { return static_cast<int>(perturbations.size()); }
  /// Throws InvalidArgument on count or dimension mismatch or when the symbol
  /// lacks order-n divided differences.
  void validate() const;
};

/// Sum over eigen-index tuples of f^[n](lambda^0_{i0},...,lambda^n_{in})
/// P^0_{i0} V_1 P^1_{i1} ... V_n P^n_{in}, evaluated in the eigenbases of the
/// H_k. Cost O(d^{n+1}) divided differences, memoized per call.
Matrix moi_evaluate(const MoiProblem& p);

/// Trace of moi_evaluate. When H_0 and H_n coincide the cycle is contracted
/// directly (O(d^n)) without forming the matrix.
double moi_trace(const MoiProblem& p);

/// MOI with every base equal to h and every perturbation equal to v.
MoiProblem uniform_problem(const SmoothFunction& f, const SymmetricOperator& h, const Matrix& v, int n);

struct IdentityResidual {
  double residual = 0.0;
  /// Sum of the max-norms of the three terms; assert residual <= tol * scale.
  double scale = 0.0;
};

/// Max-norm residual of
///   T^{..,H,..}_{f^[n-1]}(V) - T^{..,K,..}_{f^[n-1]}(V) - T^{..,H,K,..}_{f^[n]}(V_1..V_i, H-K, V_{i+1}..)
/// where `bases` holds the n bases of the order-(n-1) integral (slot i is
/// replaced by H or K) and `perturbations` holds its n-1 arguments.
IdentityResidual perturbation_identity_residual(const SmoothFunction& f, int n, const SymmetricOperator& h,
                                                const SymmetricOperator& k, int i,
                                                const std::vector<SymmetricOperator>& bases,
                                                const std::vector<Matrix>& perturbations);

/// |moi_trace| / (sup|f^(n)| over the hull of the base spectra * prod ||V_l||_{alpha_l}).
/// The exponents must satisfy sum 1/alpha_l = 1 (infinity allowed). Returns 0
/// when some V_l vanishes.
double trace_bound_ratio(const MoiProblem& p, const std::vector<double>& exponents);

}  // namespace oslab
