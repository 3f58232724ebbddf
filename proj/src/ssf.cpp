#include "oslab/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "oslab/chebyshev.hpp"
#include "oslab/error.hpp"
#include "oslab/matrix_io.hpp"

namespace oslab {

RemainderTraceExpansion::RemainderTraceExpansion(const SymmetricOperator& h, const SymmetricOperator& v, int n)
    : n_(n) {
  if (n < 1) throw InvalidArgument("spectral shift order must be >= 1");
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
  const auto& sys = h.spectrum();
  const std::size_t d = h.dim();
  // V = 0: every remainder vanishes identically, not just up to rounding.
  zero_perturbation_ = v.entries().max_abs() == 0.0;
  perturbed_eigenvalues_ = (h + v).eigenvalues();
  hull_ = {std::min(h.min_eigenvalue(), perturbed_eigenvalues_.front()),
           std::max(h.max_eigenvalue(), perturbed_eigenvalues_.back())};

  const Matrix w = sys.vectors.transpose() * v.entries() * sys.vectors;
  const double tol = cluster_tolerance(h.norm());

  std::map<std::vector<std::size_t>, double> grouped;
  std::vector<std::size_t> idx;
  for (int k = 0; k < n; ++k) {
    idx.assign(static_cast<std::size_t>(k) + 1, 0);
    auto visit = [&](auto&& self, std::size_t level, double weight) -> void {
      if (level == static_cast<std::size_t>(k)) {
        const double closing = k == 0 ? 1.0 : w(idx[level - 1], idx[0]);
        if (closing == 0.0) return;
        std::vector<std::size_t> key(idx.begin(), idx.begin() + k);
        key.push_back(idx[0]);
        std::sort(key.begin(), key.end());
        grouped[key] += weight * closing;
        return;
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double step = level == 0 ? 1.0 : w(idx[level - 1], i);
        if (step == 0.0) continue;
        idx[level] = i;
        self(self, level + 1, weight * step);
      }
    };
    if (k == 0) {
      for (std::size_t i = 0; i < d; ++i) grouped[{i}] += 1.0;
    } else {
      visit(visit, 0, 1.0);
    }
  }
  terms_.reserve(grouped.size());
  for (const auto& [key, weight] : grouped) {
    if (weight == 0.0) continue;
    std::vector<double> nodes;
    nodes.reserve(key.size());
    for (std::size_t i : key) nodes.push_back(sys.values[i]);
    terms_.push_back({snap_nodes(nodes, tol), weight});
  }
}

double RemainderTraceExpansion::operator()(const SmoothFunction& g) const {
  if (zero_perturbation_) return 0.0;
  double t = 0.0;
  for (double mu : perturbed_eigenvalues_) t += g(mu);
  for (const auto& term : terms_) t -= term.weight * divided_difference(g, term.nodes);
  return t;
}

double RemainderTraceExpansion::cdf(double lambda) const {
  if (lambda >= hull_.hi) return 0.0;
  return (*this)(truncated_power(n_, lambda));
}

const char* to_string(SSFSign s) noexcept {
  switch (s) {
    case SSFSign::nonneg:
      return "nonneg";
    case SSFSign::nonpos:
      return "nonpos";
    case SSFSign::indefinite:
      break;
  }
  return "indefinite";
}

double ssf_cdf(const SymmetricOperator& h, const SymmetricOperator& v, int n, double lambda) {
  return RemainderTraceExpansion(h, v, n).cdf(lambda);
}

namespace {

SSFEstimate estimate_from(const RemainderTraceExpansion& expansion, const std::vector<double>& grid) {
  if (grid.size() < 2) throw InvalidArgument("SSF grid needs at least two points");
  SSFEstimate est;
  est.order = expansion.order();
  est.grid = grid;
  est.hull = expansion.hull();
  est.cdf.reserve(grid.size());
  for (double lam : grid) est.cdf.push_back(expansion.cdf(lam));

  const std::size_t m = grid.size();
  const double step = grid[1] - grid[0];
  est.density.resize(m);
  est.density[0] = -(est.cdf[1] - est.cdf[0]) / step;
  est.density[m - 1] = -(est.cdf[m - 1] - est.cdf[m - 2]) / step;
  for (std::size_t j = 1; j + 1 < m; ++j) est.density[j] = -(est.cdf[j + 1] - est.cdf[j - 1]) / (2.0 * step);

  double max_abs = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : est.density) {
    max_abs = std::max(max_abs, std::abs(x));
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double tol = 1e-8 * max_abs;
  if (max_abs == 0.0 || lo >= -tol) {
    est.verdict = SSFSign::nonneg;
    est.margin = max_abs > 0.0 ? lo / max_abs : 0.0;
  } else if (hi <= tol) {
    est.verdict = SSFSign::nonpos;
    est.margin = -hi / max_abs;
  } else {
    est.verdict = SSFSign::indefinite;
    est.margin = lo / max_abs;
  }
  return est;
}

}  // namespace

SSFEstimate ssf_density(const SymmetricOperator& h, const SymmetricOperator& v, int n, int grid_size) {
  if (grid_size < 16) throw InvalidArgument("SSF grid needs at least 16 points");
  const RemainderTraceExpansion expansion(h, v, n);
  const Interval hull = expansion.hull();
  const double margin = hull.width() > 0.0 ? 0.05 * hull.width() : 0.05 * std::max(1.0, std::abs(hull.lo));
  const Interval span = hull.widened(margin);
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) grid[static_cast<std::size_t>(j)] = span.lo + span.width() * j / (grid_size - 1);
  return estimate_from(expansion, grid);
}

SSFEstimate ssf_density_on_grid(const SymmetricOperator& h, const SymmetricOperator& v, int n,
                                const std::vector<double>& grid) {
  return estimate_from(RemainderTraceExpansion(h, v, n), grid);
}

std::vector<double> ssf_moments(const SymmetricOperator& h, const SymmetricOperator& v, int n, int m_max) {
  if (m_max < 0) throw InvalidArgument("ssf_moments: m_max must be >= 0");
  const RemainderTraceExpansion expansion(h, v, n);
  std::vector<double> out;
  for (int m = 0; m <= m_max; ++m) {
    double c = 1.0;
    for (int j = m + 1; j <= m + n; ++j) c /= j;
    out.push_back(expansion(monomial(m + n, c)));
  }
  return out;
}

namespace {

std::vector<double> chebyshev_moments(const RemainderTraceExpansion& expansion, int n, int m_max, Interval interval) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    out.push_back(expansion(chebyshev_function(chebyshev_basis_antiderivative(m, n, interval))));
  }
  return out;
}

Interval moment_interval(const Interval& hull) {
  const double pad = hull.width() > 0.0 ? 1e-6 * hull.width() : 1e-6 * std::max(1.0, std::abs(hull.lo));
  return hull.widened(pad);
}

}  // namespace

std::vector<double> ssf_chebyshev_moments(const SymmetricOperator& h, const SymmetricOperator& v, int n, int m_max,
                                          Interval interval) {
  if (m_max < 0) throw InvalidArgument("ssf_chebyshev_moments: m_max must be >= 0");
  const RemainderTraceExpansion expansion(h, v, n);
  if (!interval.contains(expansion.hull())) throw InvalidArgument("ssf_chebyshev_moments: interval misses the hull");
  return chebyshev_moments(expansion, n, m_max, interval);
}

MomentIntegral ssf_moment_integral(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                                   int n, int max_degree) {
  const RemainderTraceExpansion expansion(h, v, n);
  const Interval interval = moment_interval(expansion.hull());
  const auto fit = chebyshev_adaptive([&](double x) { return f.derivative(x, n); }, interval, 1e-14, max_degree);
  const std::vector<double> mu = chebyshev_moments(expansion, n, fit.series.degree(), interval);
  MomentIntegral out;
  out.degree = fit.series.degree();
  out.converged = fit.converged;
  for (std::size_t m = 0; m < mu.size(); ++m) out.value += fit.series.coeffs[m] * mu[m];
  return out;
}

double ssf_grid_integral(const SmoothFunction& f, const SSFEstimate& est) {
  double s = 0.0;
  for (std::size_t j = 0; j < est.grid.size(); ++j) {
    const double w = (j == 0 || j + 1 == est.grid.size()) ? 0.5 : 1.0;
    s += w * f.derivative(est.grid[j], est.order) * est.density[j];
  }
  return s * est.step();
}

double ssf_mass(const SSFEstimate& est) {
  double s = 0.0;
  for (std::size_t j = 0; j < est.density.size(); ++j) {
    const double w = (j == 0 || j + 1 == est.density.size()) ? 0.5 : 1.0;
    s += w * est.density[j];
  }
  return s * est.step();
}

PositivityVerdict positivity_verdict(const SSFEstimate& est, SignClass v_sign, int n, double rel_tol) {
  PositivityVerdict out;
  out.expected = expected_sign(n, v_sign);
  out.asserted = out.expected != SignExpectation::none;
  const SignCheck c = check_sign(est.density, out.expected, rel_tol, 0.0);
  out.pass = c.pass;
  out.worst_margin = c.worst_margin;
  return out;
}

void write_ssf_csv(std::ostream& out, const SSFEstimate& est, std::uint64_t seed) {
  out << "lambda,cdf,density,order,seed\n";
  for (std::size_t j = 0; j < est.grid.size(); ++j) {
    out << format_double(est.grid[j]) << ',' << format_double(est.cdf[j]) << ',' << format_double(est.density[j])
        << ',' << est.order << ',' << seed << '\n';
  }
}

}  // namespace oslab
