#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

/// Highest derivative order advertised by functions that have closed forms
/// for every order.
inline constexpr int kUnlimitedOrder = 256;

/// Relative distance below which eigenvalues / nodes are treated as one.
inline constexpr double kClusterTolerance = 1e-8;

/// Cluster tolerance for data of magnitude `scale`.
inline double cluster_tolerance(double scale) { return kClusterTolerance * std::max(1.0, std::abs(scale)); }

/// Domain of a scalar function, possibly a half-line or open at an end.
struct Domain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double x) const noexcept {
    return (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  }
  std::string describe() const;
};

struct FunctionFlags {
  /// (-1)^{k-1} f^(k) >= 0 for every k >= 1 on the domain.
  bool completely_monotone_derivative = false;
  /// Additionally f >= 0 on the non-negative part of the domain.
  bool bernstein = false;
  bool compact_support = false;
  /// Declared only; no Fourier-analytic check is ever made.
  bool wiener_extendable = false;
};

/// Scalar function with closed-form derivatives.
///
/// The core evaluator fills Taylor coefficients f^(k)(x)/k! for
/// k = 0..coeffs.size()-1; everything else (values, derivatives, divided
/// differences) is derived from it. `analytic_radius`, when present, returns
/// a lower bound on the distance from x to the nearest singularity and
/// enables the Taylor path for clustered divided differences.
/// `exact_divided_difference`, when present, replaces the generic divided
/// difference; it receives sorted, cluster-snapped nodes.
struct SmoothFunction {
  using TaylorEvaluator = std::function<void(double x, std::span<double> coeffs)>;

  std::string name;
  nlohmann::json params = nlohmann::json::object();
  Domain domain;
  int max_order = 0;
  TaylorEvaluator taylor;
  std::function<double(double)> analytic_radius;
  std::function<double(std::span<const double>)> exact_divided_difference;
  FunctionFlags flags;

  double operator()(double x) const { return derivative(x, 0); }
  /// f^(k)(x). Throws InvalidArgument if k > max_order.
  double derivative(double x, int k) const;
  /// f^(j)(x)/j! for j = 0..kmax.
  std::vector<double> taylor_coefficients(double x, int kmax) const;
  /// {"name": ..., "params": {...}}
  nlohmann::json spec() const { return {{"name", name}, {"params", params}}; }
};

// --- builtins ---------------------------------------------------------------

/// Polynomial with ascending coefficients.
SmoothFunction polynomial(std::vector<double> coefficients);
/// coeff * x^k.
SmoothFunction monomial(int k, double coeff = 1.0);
/// coeff * exp(rate * x) + offset.
SmoothFunction exponential(double rate = 1.0, double coeff = 1.0, double offset = 0.0);
/// -exp(-x).
SmoothFunction neg_exp_decay();
/// -(x - lambda)^{-r}, r >= 1.
SmoothFunction neg_inverse_power(double r, double lambda);
/// coeff * (x - lambda)^p; on (lambda, inf) unless p is a non-negative integer.
SmoothFunction shifted_power(double p, double lambda, double coeff = 1.0);
/// (x - lambda)_+^n / n!, only C^{n-1}; divided differences use exact
/// piecewise-polynomial formulas.
SmoothFunction truncated_power(int n, double lambda);
/// height * exp(-1 / (1 - u^2)), u = (x - center) / radius, zero for |u| >= 1.
SmoothFunction bump(double center = 0.0, double radius = 1.0, double height = 1.0);

/// Builds a builtin from its configuration form {"name": ..., "params": {...}}.
/// The vocabulary is: polynomial, monomial, exp, neg_exp_decay, exp_decay,
/// one_minus_exp_decay, shifted_power, neg_inverse_power, truncated_power,
/// bump.
SmoothFunction builtin(const std::string& name, const nlohmann::json& params = nlohmann::json::object());
SmoothFunction builtin_from_spec(const nlohmann::json& spec);

// --- functional calculus ----------------------------------------------------

/// Q f^(order)(Lambda) Q^T. Throws DomainError naming the first eigenvalue
/// outside the domain of f.
SymmetricOperator apply_function(const SymmetricOperator& h, const SmoothFunction& f, int order = 0);

// --- divided differences ----------------------------------------------------

/// Sorts `nodes` and replaces every chain of nodes with consecutive gaps
/// <= tol by the chain mean.
std::vector<double> snap_nodes(std::span<const double> nodes, double tol);

/// f^[n](nodes), n = nodes.size() - 1, with cluster tolerance taken from the
/// node magnitudes. Coincident nodes use the derivative branch of the
/// recursion; tight clusters of an analytic function are expanded in a
/// Taylor series about the cluster midpoint.
double divided_difference(const SmoothFunction& f, std::span<const double> nodes);

/// Memoizing evaluator keyed by sorted snapped nodes. Holds its own copy of
/// f. Not thread-safe; use one per evaluation.
class DividedDifferences {
 public:
  DividedDifferences(const SmoothFunction& f, double cluster_tol);

  double operator()(std::span<const double> nodes);
  std::size_t cache_size() const noexcept { return cache_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<double>& key) const noexcept;
  };

  SmoothFunction f_;
  double tol_;
  std::unordered_map<std::vector<double>, double, KeyHash> cache_;
};

// --- derivative sign sampling ----------------------------------------------

struct DerivativeSignRow {
  int order = 0;
  /// min over the grid of (-1)^k f^(k)
  double min_alternating = 0.0;
  /// min over the grid of (-1)^{k-1} f^(k)
  double min_bernstein = 0.0;
  /// Estimated location of the first sign change of f^(k), if any.
  std::optional<double> sign_change;
};

struct DerivativeSignReport {
  std::vector<DerivativeSignRow> rows;
  bool completely_monotone = false;
  bool bernstein = false;
  std::string verdict() const;
};

/// Samples f^(k), k_lo <= k <= k_hi, on `points` equally spaced grid points.
/// Order 0 enters the Bernstein test as f >= 0.
DerivativeSignReport verify_derivative_signs(const SmoothFunction& f, int k_lo, int k_hi, Interval grid,
                                             int points = 101);

/// True when every flag set on `f` is consistent with sign sampling on a
/// 101-point grid over `grid`, up to `orders` derivatives.
bool flags_consistent(const SmoothFunction& f, Interval grid, int orders = 8);

/// max |f^(k)| over the interval, sampled on `points` points.
double sup_abs_derivative(const SmoothFunction& f, int k, Interval interval, int points = 2001);

}  // namespace oslab
