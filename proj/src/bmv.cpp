#include "oslab/bmv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "oslab/derivatives.hpp"
#include "oslab/error.hpp"
#include "oslab/matrix_io.hpp"
#include "oslab/moi.hpp"
#include "oslab/nnls.hpp"

namespace oslab {

namespace {

double basis(BernsteinPair::Kind kind, double t, double s) {
  return kind == BernsteinPair::Kind::bernstein ? -std::expm1(-t * s) : std::exp(-t * s);
}

// d/ds of the basis.
double basis_ds(BernsteinPair::Kind kind, double t, double s) {
  const double e = t * std::exp(-t * s);
  return kind == BernsteinPair::Kind::bernstein ? e : -e;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double BernsteinPair::evaluate(double t) const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.w * basis(kind, t, a.s);
  return (kind == Kind::bernstein ? b * t : 0.0) + sign * s;
}

double BernsteinPair::total_weight() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.w;
  return s;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidArgument("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace {

void check_grid(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw InvalidArgument("fit: t-grid and samples differ in length");
  if (t.size() < 2) throw InvalidArgument("fit: need at least two samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) throw InvalidArgument("fit: t-grid must be positive");
    if (i > 0 && !(t[i] > t[i - 1])) throw InvalidArgument("fit: t-grid must be strictly increasing");
    if (!std::isfinite(y[i])) throw InvalidArgument("fit: non-finite sample");
  }
}

struct Model {
  BernsteinPair::Kind kind;
  bool drift;
  std::vector<double> t;
  std::vector<double> y;

  std::vector<double> residual(const BernsteinPair& p) const {
    std::vector<double> r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = p.evaluate(t[i]) - y[i];
    return r;
  }
};

// Sorts atoms, merges coincident locations and drops zero weights.
void normalize_atoms(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.s < b.s; });
  std::vector<Atom> out;
  for (const Atom& a : atoms) {
    if (!(a.w > 0.0)) continue;
    if (!out.empty() && std::abs(a.s - out.back().s) <= 1e-12 * std::max(1.0, a.s)) {
      out.back().w += a.w;
      continue;
    }
    out.push_back(a);
  }
  atoms = std::move(out);
}

// Projected Levenberg-Marquardt on (b, w_j, log s_j); atoms at s = 0 keep
// their location.
BernsteinPair refine(const Model& model, BernsteinPair start) {
  BernsteinPair p = std::move(start);
  const std::size_t m = model.t.size();
  const std::size_t k = p.atoms.size();
  auto cost_of = [&](const BernsteinPair& q) {
    const auto r = model.residual(q);
    double c = 0.0;
    for (double x : r) c += x * x;
    return 0.5 * c;
  };
  double cost = cost_of(p);
  double lambda = 1e-3;
  for (int iter = 0; iter < 400; ++iter) {
    // Parameter layout: [b], w_0..w_{k-1}, u_j for atoms with s > 0.
    std::vector<std::size_t> movable;
    for (std::size_t j = 0; j < k; ++j)
      if (p.atoms[j].s > 0.0) movable.push_back(j);
    const std::size_t nb = model.drift ? 1 : 0;
    const std::size_t np = nb + k + movable.size();
    Matrix jac(m, np);
    const std::vector<double> r = model.residual(p);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = model.t[i];
      if (model.drift) jac(i, 0) = t;
      for (std::size_t j = 0; j < k; ++j) jac(i, nb + j) = p.sign * basis(model.kind, t, p.atoms[j].s);
      for (std::size_t c = 0; c < movable.size(); ++c) {
        const Atom& a = p.atoms[movable[c]];
        jac(i, nb + k + c) = p.sign * a.w * a.s * basis_ds(model.kind, t, a.s);
      }
    }
    Matrix normal(np, np);
    std::vector<double> grad(np, 0.0);
    for (std::size_t a = 0; a < np; ++a) {
      for (std::size_t i = 0; i < m; ++i) grad[a] += jac(i, a) * r[i];
      for (std::size_t b = a; b < np; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += jac(i, a) * jac(i, b);
        normal(a, b) = normal(b, a) = s;
      }
    }
    bool improved = false;
    while (lambda < 1e16) {
      Matrix damped = normal;
      for (std::size_t a = 0; a < np; ++a) damped(a, a) += lambda * std::max(normal(a, a), 1e-300);
      std::vector<double> neg(np);
      for (std::size_t a = 0; a < np; ++a) neg[a] = -grad[a];
      std::vector<double> delta;
      try {
        delta = solve_linear(damped, neg);
      } catch (const InvalidArgument&) {
        lambda *= 4.0;
        continue;
      }
      BernsteinPair trial = p;
      if (model.drift) trial.b = std::max(0.0, p.b + delta[0]);
      for (std::size_t j = 0; j < k; ++j) trial.atoms[j].w = std::max(0.0, p.atoms[j].w + delta[nb + j]);
      for (std::size_t c = 0; c < movable.size(); ++c) {
        const double step = std::clamp(delta[nb + k + c], -1.0, 1.0);
        trial.atoms[movable[c]].s = p.atoms[movable[c]].s * std::exp(step);
      }
      const double trial_cost = cost_of(trial);
      if (trial_cost < cost) {
        const double gain = (cost - trial_cost) / std::max(cost, 1e-300);
        p = std::move(trial);
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-15);
        improved = gain > 1e-14;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  normalize_atoms(p.atoms);
  return p;
}

double relative_residual(const Model& model, const BernsteinPair& p) {
  const double ynorm = norm2(model.y);
  const double rnorm = norm2(model.residual(p));
  return ynorm > 0.0 ? rnorm / ynorm : rnorm;
}

FitResult fit(const std::vector<double>& t, const std::vector<double>& samples, BernsteinPair::Kind kind, int sign,
              const DictionarySpec& spec) {
  check_grid(t, samples);
  if (spec.per_decade < 1) throw InvalidArgument("dictionary: per_decade must be >= 1");
  const double s_min = spec.s_min > 0.0 ? spec.s_min : 0.5 / t.back();
  const double s_max = spec.s_max > 0.0 ? spec.s_max : 2.0 / t.front();
  if (!(s_max > s_min)) throw InvalidArgument("dictionary: s_max must exceed s_min");
  const int count = static_cast<int>(std::ceil(spec.per_decade * std::log10(s_max / s_min))) + 1;
  const std::vector<double> dict = log_grid(s_min, s_max, std::max(count, 2));

  Model model{kind, kind == BernsteinPair::Kind::bernstein, t, samples};
  for (double& y : model.y) y *= 1.0;
  std::vector<double> target = samples;
  for (double& y : target) y *= sign;

  // Columns: drift (bernstein) or s = 0 (laplace), then the dictionary.
  const std::size_t m = t.size();
  const std::size_t cols = dict.size() + 1;
  Matrix a(m, cols);
  for (std::size_t i = 0; i < m; ++i) {
    a(i, 0) = kind == BernsteinPair::Kind::bernstein ? t[i] : 1.0;
    for (std::size_t j = 0; j < dict.size(); ++j) a(i, j + 1) = basis(kind, t[i], dict[j]);
  }
  const NnlsResult sol = nnls(a, target);

  double total = 0.0;
  for (std::size_t j = 1; j < cols; ++j) total += sol.x[j];
  if (kind == BernsteinPair::Kind::laplace) total += sol.x[0];

  BernsteinPair raw;
  raw.kind = kind;
  raw.sign = sign;
  FitResult out;
  out.t_grid = t;
  out.dictionary = spec;
  out.dictionary.s_min = s_min;
  out.dictionary.s_max = s_max;
  out.cell_log_width = std::log(dict[1] / dict[0]);

  if (kind == BernsteinPair::Kind::bernstein) {
    raw.b = sign * sol.x[0];
  } else if (sol.x[0] >= 1e-10 * total && sol.x[0] > 0.0) {
    raw.atoms.push_back({0.0, sol.x[0]});
  }
  std::vector<std::pair<std::size_t, double>> kept;
  for (std::size_t j = 1; j < cols; ++j) {
    if (sol.x[j] > 0.0 && sol.x[j] >= 1e-10 * total) kept.emplace_back(j - 1, sol.x[j]);
  }
  out.raw_atoms = static_cast<int>(kept.size()) + (raw.atoms.empty() ? 0 : 1);
  for (const auto& [j, w] : kept) raw.atoms.push_back({dict[j], w});
  normalize_atoms(raw.atoms);

  // Merge runs of adjacent dictionary cells.
  BernsteinPair merged = raw;
  merged.atoms.clear();
  if (!raw.atoms.empty() && raw.atoms.front().s == 0.0) merged.atoms.push_back(raw.atoms.front());
  for (std::size_t c = 0; c < kept.size();) {
    std::size_t e = c + 1;
    while (e < kept.size() && kept[e].first == kept[e - 1].first + 1) ++e;
    double w = 0.0;
    double logs = 0.0;
    for (std::size_t q = c; q < e; ++q) {
      w += kept[q].second;
      logs += kept[q].second * std::log(dict[kept[q].first]);
    }
    merged.atoms.push_back({std::exp(logs / w), w});
    c = e;
  }
  normalize_atoms(merged.atoms);

  // The drift enters the model with its own sign convention: keep b >= 0 during
  // refinement by fitting the oriented target.
  Model oriented{kind, kind == BernsteinPair::Kind::bernstein, t, target};
  auto oriented_pair = [&](BernsteinPair p) {
    p.sign = 1;
    p.b = sign * p.b;
    return p;
  };
  auto restore = [&](BernsteinPair p) {
    p.sign = sign;
    p.b = sign * p.b;
    return p;
  };

  BernsteinPair best = raw;
  double best_res = relative_residual(oriented, oriented_pair(raw));
  const double merged_res = relative_residual(oriented, oriented_pair(merged));
  if (merged_res <= best_res) {
    best = merged;
    best_res = merged_res;
  }
  if (spec.refine) {
    const BernsteinPair polished = restore(refine(oriented, oriented_pair(merged)));
    const double res = relative_residual(oriented, oriented_pair(polished));
    if (res <= best_res) {
      best = polished;
      best_res = res;
    }
  }
  out.pair = best;
  out.residual_rel = best_res;
  return out;
}

}  // namespace

FitResult bernstein_fit(const std::vector<double>& t_grid, const std::vector<double>& samples,
                        const DictionarySpec& spec) {
  check_grid(t_grid, samples);
  double ymax = 0.0;
  for (double y : samples) ymax = std::max(ymax, std::abs(y));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < -1e-10 * ymax) throw InvalidArgument("bernstein_fit: samples must be non-negative");
    if (i > 0 && samples[i] < samples[i - 1] - 1e-10 * ymax) {
      throw InvalidArgument("bernstein_fit: samples must be non-decreasing");
    }
  }
  return fit(t_grid, samples, BernsteinPair::Kind::bernstein, 1, spec);
}

FitResult cm_fit(const std::vector<double>& t_grid, const std::vector<double>& samples, int sign,
                 const DictionarySpec& spec) {
  if (sign != 1 && sign != -1) throw InvalidArgument("cm_fit: sign must be +1 or -1");
  check_grid(t_grid, samples);
  double ymax = 0.0;
  for (double y : samples) ymax = std::max(ymax, std::abs(y));
  for (double y : samples) {
    if (sign * y < -1e-10 * ymax) throw InvalidArgument("cm_fit: sign * samples must be non-negative");
  }
  return fit(t_grid, samples, BernsteinPair::Kind::laplace, sign, spec);
}

std::vector<double> phi_samples(const SmoothFunction& f, const SymmetricOperator& h, const SymmetricOperator& v,
                                const std::vector<double>& t_grid) {
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (t == 0.0) {
      out.push_back(0.0);
      continue;
    }
    MoiProblem p{{shifted(h, v, t), h}, {t * v.entries()}, f};
    try {
      out.push_back(moi_trace(p));
    } catch (const DomainError& e) {
      throw DomainError("phi_samples at t = " + format_double(t) + ": " + e.what(), t);
    }
  }
  return out;
}

namespace {

double min_eigenvalue_of(const Matrix& a) { return eigendecompose(a).values.front(); }

double max_abs_eigenvalue_of(const Matrix& a) {
  const auto ev = eigendecompose(a).values;
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

}  // namespace

CMReport cm_check(const CMCandidate& g, int max_order, const std::vector<double>& t_grid,
                  const CMCheckOptions& options) {
  if (max_order < 2) throw InvalidArgument("cm_check: max order must be >= 2");
  if (t_grid.size() < 2) throw InvalidArgument("cm_check: need at least two grid points");
  CMReport rep;
  rep.t_grid = t_grid;
  for (double t : t_grid) rep.samples.push_back(g.derivative(t, 0));

  // (a) signed derivatives on the grid
  for (int k = 0; k <= max_order; ++k) {
    const double orient = k % 2 == 0 ? 1.0 : -1.0;
    double lo = std::numeric_limits<double>::infinity();
    double big = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double v = k == 0 ? rep.samples[i] : g.derivative(t_grid[i], k);
      lo = std::min(lo, orient * v);
      big = std::max(big, std::abs(v));
    }
    CMTableRow row{k, lo, std::max(options.rel_tol * big, 1e-12), true};
    row.pass = lo >= -row.tolerance;
    rep.derivative_pass = rep.derivative_pass && row.pass;
    rep.derivative_sign_table.push_back(row);
  }

  // (b) alternating forward differences on a uniform sub-grid
  const double t0 = t_grid.front();
  const double t1 = t_grid.back();
  const int np = std::max(options.difference_points, max_order + 2);
  std::vector<double> diff(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) diff[static_cast<std::size_t>(i)] = g.derivative(t0 + (t1 - t0) * i / (np - 1), 0);
  double gmax = 0.0;
  for (double x : diff) gmax = std::max(gmax, std::abs(x));
  for (int k = 0; k <= max_order; ++k) {
    if (k > 0) {
      for (std::size_t i = 0; i + 1 < diff.size(); ++i) diff[i] = diff[i + 1] - diff[i];
      diff.pop_back();
    }
    const double orient = k % 2 == 0 ? 1.0 : -1.0;
    double lo = std::numeric_limits<double>::infinity();
    double big = 0.0;
    for (double x : diff) {
      lo = std::min(lo, orient * x);
      big = std::max(big, std::abs(x));
    }
    const double tol = std::max(options.rel_tol * big,
                                std::ldexp(16.0 * std::numeric_limits<double>::epsilon() * gmax, k));
    CMTableRow row{k, lo, tol, lo >= -tol};
    rep.difference_pass = rep.difference_pass && row.pass;
    rep.diff_table.push_back(row);
  }

  // (c) Hankel matrices of uniform samples (Hausdorff moments of exp(-delta s))
  const int mo = options.hankel_order;
  const double delta = (t1 - t0) / (2.0 * mo + 1.0);
  std::vector<double> c(static_cast<std::size_t>(2 * mo + 2));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = g.derivative(t0 + delta * static_cast<double>(i), 0);
  const auto size = static_cast<std::size_t>(mo) + 1;
  Matrix h0(size, size);
  Matrix h1(size, size);
  Matrix h2(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      h0(i, j) = c[i + j];
      h1(i, j) = c[i + j + 1];
      h2(i, j) = c[i + j] - c[i + j + 1];
    }
  }
  for (const Matrix* hm : {&h0, &h1, &h2}) {
    const double e = min_eigenvalue_of(*hm);
    const double tol = options.rel_tol * max_abs_eigenvalue_of(*hm);
    rep.hankel_min_eigs.push_back(e);
    rep.hankel_tolerances.push_back(tol);
    rep.hankel_pass = rep.hankel_pass && e >= -tol;
  }
  rep.verdict = rep.derivative_pass && rep.difference_pass && rep.hankel_pass;
  return rep;
}

CMCandidate phi_derivative_candidate(const SmoothFunction& f, const SymmetricOperator& h,
                                     const SymmetricOperator& v) {
  return {[f, h, v](double t, int k) { return derivative_trace(f, h, v, k + 1, t); }};
}

namespace {

void require_bmv_hypotheses(const SymmetricOperator& h, const SymmetricOperator& v, double lambda) {
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
  if (sign_class(v) != SignClass::psd) throw InvalidArgument("V must be positive semidefinite");
  if (!(lambda < h.min_eigenvalue())) {
    throw InvalidArgument("lambda = " + format_double(lambda) + " must lie below lambda_min(H) = " +
                          format_double(h.min_eigenvalue()));
  }
}

FitResult flipped(FitResult r) {
  r.pair.b = -r.pair.b;
  r.pair.sign = -1;
  return r;
}

}  // namespace

HeatResolventResult heat_and_resolvent_cases(const SymmetricOperator& h, const SymmetricOperator& v,
                                             const std::vector<double>& t_grid, double lambda, double r,
                                             int cm_order, const DictionarySpec& spec) {
  require_bmv_hypotheses(h, v, lambda);
  const SmoothFunction heat = neg_exp_decay();
  const SmoothFunction resolvent = neg_inverse_power(r, lambda);
  HeatResolventResult out;
  out.heat = flipped(bernstein_fit(t_grid, phi_samples(heat, h, v, t_grid), spec));
  out.resolvent = flipped(bernstein_fit(t_grid, phi_samples(resolvent, h, v, t_grid), spec));
  out.heat_cm = cm_check(phi_derivative_candidate(heat, h, v), cm_order, t_grid);
  out.resolvent_cm = cm_check(phi_derivative_candidate(resolvent, h, v), cm_order, t_grid);
  return out;
}

RemainderLaplaceResult remainder_laplace_check(const SmoothFunction& f, const SymmetricOperator& h,
                                               const SymmetricOperator& v, int n, const std::vector<double>& t_grid,
                                               int cm_order, const DictionarySpec& spec) {
  if (h.dim() != v.dim()) throw InvalidArgument("H and V have different dimensions");
  if (n < 1) throw InvalidArgument("remainder order must be >= 1");
  if (sign_class(v) != SignClass::psd) throw InvalidArgument("V must be positive semidefinite");
  RemainderLaplaceResult out;
  out.sign = n % 2 == 1 ? 1 : -1;
  std::vector<double> inv_fact(static_cast<std::size_t>(n), 1.0);
  for (int k = 1; k < n; ++k) inv_fact[static_cast<std::size_t>(k)] = inv_fact[static_cast<std::size_t>(k - 1)] / k;
  auto remainder_derivative = [f, h, v, n, inv_fact](double t, int j) {
    double s = derivative_trace(f, h, v, j, t + 1.0);
    for (int k = 0; k < n; ++k) s -= inv_fact[static_cast<std::size_t>(k)] * derivative_trace(f, h, v, k + j, t);
    return s;
  };
  for (double t : t_grid) out.samples.push_back(remainder_derivative(t, 0));
  const int sign = out.sign;
  CMCandidate g{[remainder_derivative, sign](double t, int j) { return sign * remainder_derivative(t, j); }};
  out.report = cm_check(g, cm_order, t_grid);
  out.fit = cm_fit(t_grid, out.samples, out.sign, spec);
  return out;
}

void write_fit_json(std::ostream& out, const FitResult& fit) {
  out << "{\"b\": " << format_double(fit.pair.b) << ", \"sign\": " << fit.pair.sign << ", \"kind\": \""
      << (fit.pair.kind == BernsteinPair::Kind::bernstein ? "bernstein" : "laplace") << "\", \"atoms\": [";
  for (std::size_t i = 0; i < fit.pair.atoms.size(); ++i) {
    if (i) out << ", ";
    out << "{\"s\": " << format_double(fit.pair.atoms[i].s) << ", \"w\": " << format_double(fit.pair.atoms[i].w)
        << '}';
  }
  out << "], \"residual_rel\": " << format_double(fit.residual_rel) << ", \"grid\": {\"t_min\": "
      << format_double(fit.t_grid.empty() ? 0.0 : fit.t_grid.front())
      << ", \"t_max\": " << format_double(fit.t_grid.empty() ? 0.0 : fit.t_grid.back())
      << ", \"points\": " << fit.t_grid.size() << ", \"s_min\": " << format_double(fit.dictionary.s_min)
      << ", \"s_max\": " << format_double(fit.dictionary.s_max) << ", \"per_decade\": " << fit.dictionary.per_decade
      << "}}\n";
}

void write_cm_report_csv(std::ostream& out, const CMReport& report) {
  out << "layer,order,min_value,tolerance,pass\n";
  for (const auto& r : report.derivative_sign_table) {
    out << "derivative," << r.order << ',' << format_double(r.min_value) << ',' << format_double(r.tolerance) << ','
        << (r.pass ? 1 : 0) << '\n';
  }
  for (const auto& r : report.diff_table) {
    out << "difference," << r.order << ',' << format_double(r.min_value) << ',' << format_double(r.tolerance) << ','
        << (r.pass ? 1 : 0) << '\n';
  }
  for (std::size_t i = 0; i < report.hankel_min_eigs.size(); ++i) {
    out << "hankel," << i << ',' << format_double(report.hankel_min_eigs[i]) << ','
        << format_double(-report.hankel_tolerances[i]) << ','
        << (report.hankel_min_eigs[i] >= -report.hankel_tolerances[i] ? 1 : 0) << '\n';
  }
}

}  // namespace oslab
