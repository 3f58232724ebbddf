#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oslab/functions.hpp"
#include "oslab/spectral.hpp"

namespace oslab {

/// Perturbation kernels on the coordinate basis (indices start at 1).
enum class KernelKind {
  /// V = A^T A with A_{l i} = rho^i cos(0.7 (l + 1) i), l = 0..2; PSD, rank <= 3.
  decaying_factor,
  /// v_ij = rho^{i+j} sin(i + j); indefinite in general.
  decaying_indefinite,
  /// v_ii = rho^{2i}; commutes with H.
  diagonal,
  /// v_11 = 1, all other entries zero.
  first_coordinate,
};

const char* to_string(KernelKind k) noexcept;
KernelKind kernel_from_string(const std::string& name);

/// Diagonal H with lambda_i = m + i^gamma plus a decaying kernel V. Both are
/// defined entrywise for every index, so truncation never re-diagonalizes.
struct DiagonalModel {
  double m = 0.0;
  double gamma = 1.0;
  double rho = 0.5;
  double scale = 1.0;
  KernelKind kernel = KernelKind::decaying_factor;

  /// Only the AᵀA kernel carries the PSD flag.
  bool psd() const noexcept { return kernel == KernelKind::decaying_factor; }
  double eigenvalue(int i) const;
  double kernel_entry(int i, int j) const;
  void validate() const;
};

/// Top-left p x p blocks (H_p, V_p).
std::pair<SymmetricOperator, SymmetricOperator> truncate(const DiagonalModel& model, int p);

/// (P_k H P_k, P_k V P_k) on the span of the k lowest eigenvectors of H,
/// written in that eigenbasis.
std::pair<SymmetricOperator, SymmetricOperator> projection_compression(const SymmetricOperator& h,
                                                                       const SymmetricOperator& v, int k);

/// ||(I - P_k) V||_q for k = 0..dim with the same projections.
std::vector<double> compression_tail_norms(const SymmetricOperator& h, const SymmetricOperator& v, double q);

/// ||V_P - V_p||_1 with V_p zero-padded to size P.
double truncation_gap(const DiagonalModel& model, int p, int reference);

struct StudyRow {
  int p = 0;
  double l1_error = 0.0;
  /// SSF study: min of the signed density; derivative study: min over s of
  /// the sign-adjusted psi_p.
  double psi_min = 0.0;
  double bound_rhs = 0.0;
  /// Whether the positivity verdict at this p passed.
  bool sign_pass = true;
};

struct SsfStudy {
  int order = 0;
  std::vector<StudyRow> rows;
  std::vector<double> grid;
  double mass = 0.0;
  double c_emp = 0.0;
  /// Errors strictly decrease along p_list.
  bool decreasing = false;
  /// Error at the second-largest p is at most 1e-3 of the mass.
  bool small_enough = false;
  bool signs_ok = true;
};

/// SSF estimates for every p on the reference grid (the hull of the largest
/// p, widened 5%). Runs the p values on up to `jobs` threads.
SsfStudy ssf_convergence_study(const DiagonalModel& model, int n, const std::vector<int>& p_list, int grid_size,
                               int jobs = 1);

struct DerivativeStudy {
  int order = 0;
  std::vector<double> s_grid;
  /// psi_p(s) per p, one row per entry of p_list.
  std::vector<std::vector<double>> psi;
  std::vector<StudyRow> rows;
  /// max_s |psi_p - psi_P| is nonincreasing in p.
  bool cauchy = false;
  bool signs_ok = true;
};

/// psi_p(s) = Tr d^n/ds^n f(H_p + s V_p) for each p. f must carry the
/// completely monotone derivative flag, so f^(n) has sign (-1)^{n-1}.
DerivativeStudy derivative_trace_truncation_study(const DiagonalModel& model, const SmoothFunction& f, int n,
                                                  const std::vector<int>& p_list, const std::vector<double>& s_grid,
                                                  int jobs = 1);

/// Columns p, l1_error, psi_min, bound_rhs.
void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);

}  // namespace oslab
