#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "oslab/functions.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

struct Atom {
  double s = 0.0;
  double w = 0.0;
};

/// Finite-atom representation of a Bernstein or completely monotone function.
///
/// bernstein: b t + sign * sum_j w_j (1 - exp(-t s_j)), s_j > 0
/// laplace:   sign * sum_j w_j exp(-t s_j),              s_j >= 0
struct BernsteinPair {
  enum class Kind { bernstein, laplace };
  Kind kind = Kind::bernstein;
  double b = 0.0;
  int sign = 1;
  /// Strictly increasing locations, non-negative weights.
  std::vector<Atom> atoms;

  double evaluate(double t) const;
  double total_weight() const;
};

struct DictionarySpec {
  /// Non-positive values select the defaults 0.5 / t_max and 2 / t_min.
  double s_min = 0.0;
  double s_max = 0.0;
  int per_decade = 200;
  /// Levenberg-Marquardt polish of the clustered atoms.
  bool refine = true;
};

struct FitResult {
  BernsteinPair pair;
  /// ||model - samples||_2 / ||samples||_2 (absolute when the samples vanish).
  double residual_rel = 0.0;
  std::vector<double> t_grid;
  DictionarySpec dictionary;
  /// Log-ratio between neighbouring dictionary locations.
  double cell_log_width = 0.0;
  /// Non-zero NNLS weights before clustering.
  int raw_atoms = 0;
};

/// min over b >= 0, w >= 0 of ||samples - b t - sum_j w_j (1 - exp(-t s_j))||_2
/// over a log-spaced dictionary, followed by pruning (w < 1e-10 sum w),
/// merging of adjacent dictionary cells and an optional refinement.
FitResult bernstein_fit(const std::vector<double>& t_grid, const std::vector<double>& samples,
                        const DictionarySpec& spec = {});

/// sign * samples ~ sum_j w_j exp(-t s_j) with an s = 0 column.
FitResult cm_fit(const std::vector<double>& t_grid, const std::vector<double>& samples, int sign,
                 const DictionarySpec& spec = {});

/// phi(t) = Tr(f(H + tV) - f(H)) as the trace of T^{H+tV,H}_{f^[1]}(tV).
std::vector<double> phi_samples(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                                const std::vector<double>& t_grid);

/// Candidate completely monotone function g with derivatives g^(k)(t).
struct CMCandidate {
  std::function<double(double t, int k)> derivative;
};

struct CMTableRow {
  int order = 0;
  double min_value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct CMReport {
  std::vector<double> t_grid;
  std::vector<double> samples;
  /// min over the grid of (-1)^k g^(k)
  std::vector<CMTableRow> derivative_sign_table;
  /// min over a uniform sub-grid of (-1)^k Delta^k g
  std::vector<CMTableRow> diff_table;
  /// Minimal eigenvalues of [c_{i+j}], [c_{i+j+1}], [c_{i+j} - c_{i+j+1}],
  /// c_m = g(t_0 + m delta), with the matching tolerances -1e-8 ||H||.
  std::vector<double> hankel_min_eigs;
  std::vector<double> hankel_tolerances;
  bool derivative_pass = true;
  bool difference_pass = true;
  bool hankel_pass = true;
  bool verdict = true;
};

struct CMCheckOptions {
  double rel_tol = 1e-8;
  int difference_points = 33;
  /// Hankel matrices are (hankel_order + 1) square.
  int hankel_order = 5;
};

/// Three-layer complete monotonicity test on [t_grid.front(), t_grid.back()].
CMReport cm_check(const CMCandidate& g, int max_order, const std::vector<double>& t_grid,
                  const CMCheckOptions& options = {});

/// g(t) = phi'(t) = psi_1(t) for f on the pair (H, V); g^(k) = psi_{k+1}.
CMCandidate phi_derivative_candidate(const SmoothFunction& f, const SymmetricOperator& h,
                                     const SymmetricOperator& v);

struct HeatResolventResult {
  /// Tr(exp(-H - tV) - exp(-H)) = b_1 t - int (1 - exp(-ts)) dmu(s), b_1 <= 0.
  FitResult heat;
  /// Tr((H + tV - lambda)^{-r} - (H - lambda)^{-r}) = b_2 t - int (1 - exp(-ts)) dnu(s).
  FitResult resolvent;
  CMReport heat_cm;
  CMReport resolvent_cm;
};

/// Fits the negated traces as Bernstein functions and flips the result.
/// Requires V PSD and lambda < lambda_min(H).
HeatResolventResult heat_and_resolvent_cases(const SymmetricOperator& h, const SymmetricOperator& v,
                                             const std::vector<double>& t_grid, double lambda, double r,
                                             int cm_order = 4, const DictionarySpec& spec = {});

struct RemainderLaplaceResult {
  std::vector<double> samples;
  int sign = 1;
  CMReport report;
  FitResult fit;
};

/// t -> Tr R_n(f, H + tV, V) with sign (-1)^{n-1}; its derivatives are
/// psi_j(t + 1) - sum_{k<n} psi_{k+j}(t) / k!.
RemainderLaplaceResult remainder_laplace_check(const SmoothFunction& f, const SymmetricOperator& h,
                                               const SymmetricOperator& v, int n, const std::vector<double>& t_grid,
                                               int cm_order = 4, const DictionarySpec& spec = {});

/// n log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// {"b", "sign", "atoms": [{"s", "w"}], "residual_rel", "grid": {...}} with
/// 17 significant digits.
void write_fit_json(std::ostream& out, const FitResult& fit);
/// Columns layer, order, min_value, tolerance, pass.
void write_cm_report_csv(std::ostream& out, const CMReport& report);

}  // namespace oslab
