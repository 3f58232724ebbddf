#include "oslab/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "oslab/derivatives.hpp"
#include "oslab/error.hpp"
#include "oslab/matrix_io.hpp"
#include "oslab/parallel.hpp"
#include "oslab/sign.hpp"
#include "oslab/ssf.hpp"

namespace oslab {

const char* to_string(KernelKind k) noexcept {
  switch (k) {
    case KernelKind::decaying_factor:
      return "decaying_factor";
    case KernelKind::decaying_indefinite:
      return "decaying_indefinite";
    case KernelKind::diagonal:
      return "diagonal";
    case KernelKind::first_coordinate:
      return "first_coordinate";
  }
  return "?";
}

KernelKind kernel_from_string(const std::string& name) {
  for (KernelKind k : {KernelKind::decaying_factor, KernelKind::decaying_indefinite, KernelKind::diagonal,
                       KernelKind::first_coordinate}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidArgument("unknown kernel '" + name +
                        "' (expected decaying_factor, decaying_indefinite, diagonal or first_coordinate)");
}

void DiagonalModel::validate() const {
  if (!(gamma > 0.0)) throw InvalidArgument("model.gamma must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("model.rho must lie in (0, 1)");
  if (!std::isfinite(m) || !std::isfinite(scale)) throw InvalidArgument("model.m and model.scale must be finite");
}

double DiagonalModel::eigenvalue(int i) const { return m + std::pow(static_cast<double>(i), gamma); }

double DiagonalModel::kernel_entry(int i, int j) const {
  switch (kernel) {
    case KernelKind::decaying_factor: {
      double s = 0.0;
      for (int l = 0; l < 3; ++l) s += std::cos(0.7 * (l + 1) * i) * std::cos(0.7 * (l + 1) * j);
      return scale * std::pow(rho, i + j) * s;
    }
    case KernelKind::decaying_indefinite:
      return scale * std::pow(rho, i + j) * std::sin(static_cast<double>(i + j));
    case KernelKind::diagonal:
      return i == j ? scale * std::pow(rho, 2 * i) : 0.0;
    case KernelKind::first_coordinate:
      return i == 1 && j == 1 ? scale : 0.0;
  }
  return 0.0;
}

std::pair<SymmetricOperator, SymmetricOperator> truncate(const DiagonalModel& model, int p) {
  if (p < 1) throw InvalidArgument("truncation size p must be >= 1");
  model.validate();
  const auto d = static_cast<std::size_t>(p);
  Matrix h(d, d);
  Matrix v(d, d);
  for (int i = 1; i <= p; ++i) {
    h(i - 1, i - 1) = model.eigenvalue(i);
    for (int j = i; j <= p; ++j) v(i - 1, j - 1) = v(j - 1, i - 1) = model.kernel_entry(i, j);
  }
  return {SymmetricOperator(h), SymmetricOperator(v)};
}

std::pair<SymmetricOperator, SymmetricOperator> projection_compression(const SymmetricOperator& h,
                                                                       const SymmetricOperator& v, int k) {
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
  if (k < 1 || static_cast<std::size_t>(k) > h.dim()) {
    throw InvalidArgument("compression rank k = " + std::to_string(k) + " outside [1, " + std::to_string(h.dim()) +
                          "]");
  }
  const Matrix& q = h.spectrum().vectors;
  const auto kk = static_cast<std::size_t>(k);
  Matrix qk(h.dim(), kk);
  for (std::size_t i = 0; i < h.dim(); ++i)
    for (std::size_t j = 0; j < kk; ++j) qk(i, j) = q(i, j);
  const Matrix qt = qk.transpose();
  return {SymmetricOperator(qt * h.entries() * qk), SymmetricOperator(qt * v.entries() * qk)};
}

std::vector<double> compression_tail_norms(const SymmetricOperator& h, const SymmetricOperator& v, double q) {
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
  const Matrix& basis = h.spectrum().vectors;
  const std::size_t d = h.dim();
  // In the eigenbasis, (I - P_k) V keeps rows k..d-1 of Q^T V.
  const Matrix w = basis.transpose() * v.entries();
  std::vector<double> out;
  for (std::size_t k = 0; k <= d; ++k) {
    Matrix tail(d, d);
    for (std::size_t i = k; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) tail(i, j) = w(i, j);
    out.push_back(schatten_norm(tail, q));
  }
  return out;
}

double truncation_gap(const DiagonalModel& model, int p, int reference) {
  if (p > reference) throw InvalidArgument("truncation_gap: p exceeds the reference size");
  const auto vp = truncate(model, reference).second;
  Matrix diff = vp.entries();
  for (std::size_t i = 0; i < static_cast<std::size_t>(p); ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) diff(i, j) = 0.0;
  return schatten_norm(SymmetricOperator(diff), 1.0);
}

namespace {

void check_p_list(const std::vector<int>& p_list) {
  if (p_list.size() < 2) throw InvalidArgument("p_list needs at least two entries");
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    if (p_list[i] < 1) throw InvalidArgument("p_list entries must be >= 1");
    if (i > 0 && p_list[i] <= p_list[i - 1]) throw InvalidArgument("p_list must be strictly ascending");
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

SsfStudy ssf_convergence_study(const DiagonalModel& model, int n, const std::vector<int>& p_list, int grid_size,
                               int jobs) {
  check_p_list(p_list);
  if (n < 1) throw InvalidArgument("spectral shift order must be >= 1");
  if (grid_size < 16) throw InvalidArgument("grid_size must be >= 16");
  const int big = p_list.back();
  const auto [h_ref, v_ref] = truncate(model, big);

  SsfStudy study;
  study.order = n;
  const SSFEstimate reference = ssf_density(h_ref, v_ref, n, grid_size);
  study.grid = reference.grid;

  SymmetricOperator vn = v_ref;
  for (int k = 1; k < n; ++k) vn = SymmetricOperator(vn.entries() * v_ref.entries());
  study.mass = trace(vn) / factorial(n);

  const SignClass v_sign = sign_class(v_ref);
  std::vector<SSFEstimate> estimates(p_list.size());
  parallel_for(p_list.size(), jobs, [&](std::size_t i) {
    if (p_list[i] == big) {
      estimates[i] = reference;
      return;
    }
    const auto [hp, vp] = truncate(model, p_list[i]);
    estimates[i] = ssf_density_on_grid(hp, vp, n, study.grid);
  });

  const double vnorm = schatten_norm(v_ref, 1.0);
  const double step = reference.step();
  std::vector<double> gaps(p_list.size());
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    StudyRow row;
    row.p = p_list[i];
    const auto& est = estimates[i];
    double err = 0.0;
    for (std::size_t g = 0; g < study.grid.size(); ++g) {
      const double w = g == 0 || g + 1 == study.grid.size() ? 0.5 : 1.0;
      err += w * std::abs(est.density[g] - reference.density[g]);
    }
    row.l1_error = err * step;
    const PositivityVerdict verdict = positivity_verdict(est, sign_class(truncate(model, row.p).second), n);
    row.sign_pass = verdict.pass;
    // Signed so that the expected pattern reads psi_min >= 0.
    row.psi_min = v_sign == SignClass::nsd && n % 2 == 1
                      ? -*std::max_element(est.density.begin(), est.density.end())
                      : *std::min_element(est.density.begin(), est.density.end());
    study.signs_ok = study.signs_ok && row.sign_pass;
    gaps[i] = truncation_gap(model, row.p, big);
    study.rows.push_back(row);
  }

  // Smallest constant that makes err(p) <= n C ||V_P||_1^{n-1} ||V_P - V_p||_1 hold.
  const double pre = n * std::pow(vnorm, n - 1);
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    const double denom = pre * gaps[i];
    if (denom > 0.0) study.c_emp = std::max(study.c_emp, study.rows[i].l1_error / denom);
  }
  for (std::size_t i = 0; i < study.rows.size(); ++i) study.rows[i].bound_rhs = pre * study.c_emp * gaps[i];

  study.decreasing = true;
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    if (!(study.rows[i].l1_error < study.rows[i - 1].l1_error)) study.decreasing = false;
  }
  const StudyRow& second = study.rows[study.rows.size() - 2];
  study.small_enough = second.l1_error <= 1e-3 * std::abs(study.mass);
  return study;
}

DerivativeStudy derivative_trace_truncation_study(const DiagonalModel& model, const SmoothFunction& f, int n,
                                                  const std::vector<int>& p_list, const std::vector<double>& s_grid,
                                                  int jobs) {
  check_p_list(p_list);
  if (n < 1) throw InvalidArgument("derivative order must be >= 1");
  if (!f.flags.completely_monotone_derivative) {
    throw InvalidArgument("function '" + f.name + "' is not flagged with a completely monotone derivative");
  }
  if (s_grid.empty()) throw InvalidArgument("s_grid is empty");
  for (double s : s_grid)
    if (s < 0.0) throw InvalidArgument("s_grid must lie in [0, inf)");

  DerivativeStudy study;
  study.order = n;
  study.s_grid = s_grid;
  study.psi.assign(p_list.size(), {});
  parallel_for(p_list.size(), jobs, [&](std::size_t i) {
    const auto [hp, vp] = truncate(model, p_list[i]);
    std::vector<double> row;
    row.reserve(s_grid.size());
    for (double s : s_grid) row.push_back(derivative_trace(f, hp, vp, n, s));
    study.psi[i] = std::move(row);
  });

  // f^(n) carries the sign (-1)^{n-1}; orient psi so the claim reads ">= 0".
  const double orient = n % 2 == 1 ? 1.0 : -1.0;
  const std::vector<double>& ref = study.psi.back();
  const int big = p_list.back();
  const double vnorm = schatten_norm(truncate(model, big).second, 1.0);
  const double pre = n * std::pow(vnorm, n - 1);
  double c_emp = 0.0;
  std::vector<double> gaps;
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    StudyRow row;
    row.p = p_list[i];
    std::vector<double> oriented;
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
      row.l1_error = std::max(row.l1_error, std::abs(study.psi[i][j] - ref[j]));
      oriented.push_back(orient * study.psi[i][j]);
    }
    const SignClass vs = sign_class(truncate(model, row.p).second);
    const SignCheck check = check_sign(oriented, expected_sign(n, vs));
    row.sign_pass = check.pass;
    row.psi_min = *std::min_element(oriented.begin(), oriented.end());
    study.signs_ok = study.signs_ok && row.sign_pass;
    gaps.push_back(truncation_gap(model, row.p, big));
    if (pre * gaps.back() > 0.0) c_emp = std::max(c_emp, row.l1_error / (pre * gaps.back()));
    study.rows.push_back(row);
  }
  for (std::size_t i = 0; i < study.rows.size(); ++i) study.rows[i].bound_rhs = pre * c_emp * gaps[i];
  study.cauchy = true;
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    if (study.rows[i].l1_error > study.rows[i - 1].l1_error + 1e-12 * std::max(1.0, std::abs(ref.front()))) {
      study.cauchy = false;
    }
  }
  return study;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  out << "p,l1_error,psi_min,bound_rhs\n";
  for (const auto& r : rows) {
    out << r.p << ',' << format_double(r.l1_error) << ',' << format_double(r.psi_min) << ','
        << format_double(r.bound_rhs) << '\n';
  }
}

}  // namespace oslab
