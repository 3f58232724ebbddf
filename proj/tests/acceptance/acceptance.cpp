// Desk-scale acceptance run: one PASS/FAIL line per criterion with runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "oslab/bmv.hpp"
#include "oslab/derivatives.hpp"
#include "oslab/experiment.hpp"
#include "oslab/moi.hpp"
#include "oslab/random.hpp"
#include "oslab/ssf.hpp"
#include "oslab/truncation.hpp"

using namespace oslab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

double trace_power(const SymmetricOperator& v, int n) {
  Matrix m = Matrix::identity(v.dim());
  for (int k = 0; k < n; ++k) m = m * v.entries();
  return trace(m);
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

Outcome derivative_vs_fd() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const std::size_t dim = 2 + i % 5;
    const int k = 1 + static_cast<int>(i % 3);
    const auto [h, v] = i % 2 ? random_goe_pair(dim, 1000 + i) : random_psd_pair(dim, 1000 + i);
    const SmoothFunction f = (i / 3) % 2 ? bump(0.0, 3.0) : exponential();
    const Matrix exact = operator_derivative(f, h, v, k, 0.3);
    const Matrix fd = finite_difference_oracle(f, h, v, k, 0.3, default_fd_step(k, v));
    worst = std::max(worst, max_abs_diff(exact, fd) / std::max(exact.max_abs(), 1e-300));
  }
  return {worst <= 1e-6, fmt("worst rel %.2e", worst)};
}

Outcome moi_vs_projector_sum() {
  double worst = 0.0;
  for (unsigned i = 0; i < 25; ++i) {
    const std::size_t dim = 1 + i % 4;
    const int n = 1 + static_cast<int>(i % 3);
    std::vector<SymmetricOperator> bases;
    std::vector<Matrix> perts;
    for (int j = 0; j <= n; ++j) bases.emplace_back(oracle::random_symmetric(dim, 200 + 10 * i + j));
    for (int j = 0; j < n; ++j) perts.push_back(oracle::random_symmetric(dim, 500 + 10 * i + j));
    const Matrix got = moi_evaluate({bases, perts, exponential()});
    const Matrix ref = oracle::projector_sum(oracle::opitz_exp_dd, bases, perts);
    worst = std::max(worst, max_abs_diff(got, ref) / ref.max_abs());
  }
  return {worst <= 1e-9, fmt("worst rel %.2e", worst)};
}

Outcome perturbation_identity() {
  double worst = 0.0;
  for (unsigned i = 0; i < 25; ++i) {
    const std::size_t dim = 2 + i % 3;
    const int n = 1 + static_cast<int>(i % 4);
    std::vector<SymmetricOperator> bases;
    std::vector<Matrix> perts;
    for (int j = 0; j < n; ++j) bases.emplace_back(oracle::random_symmetric(dim, 900 + 10 * i + j));
    for (int j = 0; j + 1 < n; ++j) perts.push_back(oracle::random_symmetric(dim, 1300 + 10 * i + j));
    const SymmetricOperator h(oracle::random_symmetric(dim, 1700 + i));
    const SymmetricOperator k(oracle::random_symmetric(dim, 1800 + i));
    const SmoothFunction f = i % 2 ? bump(0.0, 8.0) : exponential();
    const auto r = perturbation_identity_residual(f, n, h, k, static_cast<int>(i) % n, bases, perts);
    worst = std::max(worst, r.residual / r.scale);
  }
  return {worst <= 1e-8, fmt("worst residual/scale %.2e", worst)};
}

Outcome remainder_triple() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 25; ++i) {
    const int n = 1 + static_cast<int>(i % 4);
    const auto [h, v] = random_goe_pair(2 + i % 4, 2000 + i);
    const SmoothFunction f = i % 2 ? bump(0.0, 4.0) : exponential();
    const double a = taylor_remainder_direct_trace(f, h, v, n);
    const double b = n >= 2 ? taylor_remainder_via_perturbation_trace(f, h, v, n)
                            : trace(first_order_remainder(f, h, v));
    const double c = remainder_trace_integral(f, h, v, n, 1e-8).value;
    worst = std::max({worst, rel(a, b), rel(a, c), rel(b, c)});
  }
  return {worst <= 1e-8, fmt("worst pairwise %.2e", worst)};
}

// Criteria 5 and 6 share their instances.
struct ClosureStats {
  double grid = 0.0;
  double moment = 0.0;
  double mass_exact = 0.0;
  double mass_grid = 0.0;
};

ClosureStats closure_stats() {
  ClosureStats s;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    const auto [h, v] = i % 2 ? random_goe_pair(2 + i % 4, 3000 + i) : random_psd_pair(2 + i % 4, 3000 + i);
    const SmoothFunction f = (i / 3) % 2 ? bump(0.0, 3.0) : exponential();
    const double exact = taylor_remainder_direct_trace(f, h, v, n);
    const auto est = ssf_density(h, v, n, 4001);
    s.grid = std::max(s.grid, std::abs(ssf_grid_integral(f, est) - exact) / std::abs(exact));
    s.moment = std::max(s.moment, std::abs(ssf_moment_integral(f, h, v, n).value - exact) / std::abs(exact));
    const double mass = trace_power(v, n) / factorial(n);
    s.mass_exact = std::max(s.mass_exact, std::abs(ssf_moments(h, v, n, 0)[0] - mass) / std::abs(mass));
    s.mass_grid = std::max(s.mass_grid, std::abs(ssf_mass(est) - mass) / std::abs(mass));
  }
  return s;
}

template <class Check>
int count_sign_failures(Check check) {
  int failures = 0;
  int runs = 0;
  for (std::uint64_t i = 0; i < 40; ++i) {
    const std::size_t dim = 1 + i % 8;
    for (int n = 2; n <= 4; ++n) {
      const auto [h, v] = random_psd_pair(dim, 4000 + 10 * i + n);
      failures += !check(h, v, n);
      ++runs;
      if (n % 2) {
        const auto [h2, v2] = random_nsd_pair(dim, 4000 + 10 * i + n);
        failures += !check(h2, v2, n);
        ++runs;
      }
    }
  }
  return runs >= 100 ? failures : -1;
}

Outcome ssf_positivity() {
  double worst = 1.0;
  const int failures = count_sign_failures([&](const SymmetricOperator& h, const SymmetricOperator& v, int n) {
    const auto est = ssf_density(h, v, n, 400);
    const auto pv = positivity_verdict(est, sign_class(v), n);
    worst = std::min(worst, pv.worst_margin);
    return pv.asserted && pv.pass;
  });
  return {failures == 0, std::to_string(failures) + " failures over 160 runs, worst margin " + fmt("%.2e", worst)};
}

Outcome psi_positivity() {
  std::vector<double> s_grid;
  for (int i = 0; i <= 10; ++i) s_grid.push_back(0.1 * i);
  double worst = 1.0;
  const int failures = count_sign_failures([&](const SymmetricOperator& h, const SymmetricOperator& v, int n) {
    const auto r = derivative_trace_sign_check(exponential(), h, v, n, s_grid);
    worst = std::min(worst, r.check.worst_margin);
    return r.hypothesis_holds && r.check.expected != SignExpectation::none && r.check.pass;
  });
  return {failures == 0, std::to_string(failures) + " failures over 160 runs, worst margin " + fmt("%.2e", worst)};
}

Outcome power_signs() {
  const std::vector<double> s_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  int failures = 0;
  int runs = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto [h, v] = random_psd_pair(2 + i % 5, 5000 + i);
    for (double p : {0.5, 1.5, 2.0, -1.0}) {
      for (int k = 1; k <= 4; ++k) {
        const double lambda = h.min_eigenvalue() - 1.0;
        const auto r = power_sign_report(h, v, p, lambda, k, s_grid, 1e-8);
        failures += !(r.hypotheses_hold && r.pass);
        ++runs;
      }
    }
  }
  return {failures == 0, std::to_string(failures) + " failures over " + std::to_string(runs) + " reports"};
}

bool atoms_match(const FitResult& fit, const std::map<double, double>& expected, std::string& why) {
  if (std::abs(fit.pair.b) > 1e-6) {
    why = "b = " + fmt("%.2e", fit.pair.b);
    return false;
  }
  if (fit.residual_rel > 1e-6) {
    why = "residual " + fmt("%.2e", fit.residual_rel);
    return false;
  }
  // every atom must sit within one cell of an expected location; grouped weights within 1e-3
  std::map<double, double> got;
  for (const auto& a : fit.pair.atoms) {
    bool placed = false;
    for (const auto& [s, w] : expected) {
      if (std::abs(std::log(a.s / s)) <= fit.cell_log_width + 1e-12) {
        got[s] += a.w;
        placed = true;
      }
    }
    if (!placed && a.w > 1e-3) {
      why = "stray atom at s = " + fmt("%.4g", a.s);
      return false;
    }
  }
  for (const auto& [s, w] : expected) {
    if (std::abs(got[s] - w) > 1e-3) {
      why = "weight at s = " + fmt("%.3g", s) + " is " + fmt("%.6f", got[s]);
      return false;
    }
  }
  return true;
}

Outcome bmv_exact() {
  const auto t = log_grid(0.01, 10.0, 64);
  std::string why;
  const auto scalar = heat_and_resolvent_cases(SymmetricOperator::scalar(0.0), SymmetricOperator::scalar(1.0), t,
                                               -1.0, 1.0);
  if (!atoms_match(scalar.heat, {{1.0, 1.0}}, why)) return {false, "scalar: " + why};
  const auto diag = heat_and_resolvent_cases(SymmetricOperator::diagonal(std::vector<double>{0.0, std::log(2.0)}),
                                             SymmetricOperator::diagonal(std::vector<double>{1.0, 2.0}), t, -1.0, 1.0);
  // Tr(exp(-H - tV) - exp(-H)) = (e^{-t} - 1) + (e^{-2t} - 1) / 2
  if (!atoms_match(diag.heat, {{1.0, 1.0}, {2.0, 0.5}}, why)) return {false, "commuting: " + why};
  return {true, fmt("residuals %.1e", scalar.heat.residual_rel) + fmt(" / %.1e", diag.heat.residual_rel)};
}

Outcome bmv_generic() {
  const auto t = log_grid(0.01, 10.0, 64);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto [h, v] = random_psd_pair(2 + i % 5, 6000 + i);
    for (double r : {1.0, 2.0}) {
      const auto res = heat_and_resolvent_cases(h, v, t, h.min_eigenvalue() - 1.0, r);
      for (const CMReport* rep : {&res.heat_cm, &res.resolvent_cm}) {
        if (!(rep->derivative_pass && rep->difference_pass && rep->hankel_pass)) {
          return {false, "cm_check failed on instance " + std::to_string(i)};
        }
      }
      worst = std::max({worst, res.heat.residual_rel, res.resolvent.residual_rel});
    }
  }
  return {worst <= 1e-4, fmt("worst residual %.2e", worst)};
}

Outcome cm_derivative_traces() {
  const auto t = log_grid(0.01, 10.0, 64);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto [h, v] = random_psd_pair(2 + i % 5, 7000 + i);
    for (int n = 1; n <= 3; ++n) {
      std::vector<double> y;
      for (double x : t) y.push_back(derivative_trace(neg_exp_decay(), h, v, n, x));
      const int sign = n % 2 ? 1 : -1;
      const auto fit = cm_fit(t, y, sign);
      for (const auto& a : fit.pair.atoms)
        if (a.w < 0) return {false, "negative weight"};
      worst = std::max(worst, fit.residual_rel);
    }
  }
  return {worst <= 1e-4, fmt("worst residual %.2e", worst)};
}

Outcome truncation_convergence() {
  DiagonalModel model;
  model.gamma = 1.0;
  model.rho = 0.5;
  std::string detail;
  bool ok = true;
  for (int n : {1, 2}) {
    const auto s = ssf_convergence_study(model, n, {4, 8, 16, 32}, 2000, 4);
    ok = ok && s.decreasing && s.small_enough;
    detail += "n=" + std::to_string(n) + ": p=16 err/mass " +
              fmt("%.2e", s.rows[s.rows.size() - 2].l1_error / s.mass) + (n == 1 ? "; " : "");
  }
  return {ok, detail};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "oslab_acceptance_determinism";
  fs::remove_all(base);
  const nlohmann::json cfg{{"schema", 1}, {"command", "verify-all"}, {"seed", 2024}};
  std::map<std::string, std::string> runs[2];
  for (int r = 0; r < 2; ++r) {
    RunOptions o;
    o.out_dir = base / (r ? "b" : "a");
    o.jobs = r ? 4 : 1;
    fs::create_directories(o.out_dir);
    std::ostringstream err;
    if (run(cfg, o, err) != 0) return {false, "verify-all failed: " + err.str()};
    runs[r] = snapshot(o.out_dir);
  }
  if (runs[0] != runs[1]) return {false, "artifacts differ"};
  return {true, std::to_string(runs[0].size()) + " identical files (jobs 1 vs 4)"};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  ClosureStats closure;
  bool closure_done = false;
  auto closure_once = [&]() -> const ClosureStats& {
    if (!closure_done) closure = closure_stats();
    closure_done = true;
    return closure;
  };
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"derivative vs finite-difference oracle", derivative_vs_fd},
      {"multilinear integral vs projector sum", moi_vs_projector_sum},
      {"perturbation identity residuals", perturbation_identity},
      {"remainder triple agreement", remainder_triple},
      {"trace formula closure",
       [&] {
         const auto& s = closure_once();
         return Outcome{s.grid <= 1e-3 && s.moment <= 1e-6,
                        fmt("grid %.2e", s.grid) + fmt(", moment path %.2e", s.moment)};
       }},
      {"spectral shift mass",
       [&] {
         const auto& s = closure_once();
         return Outcome{s.mass_exact <= 1e-6 && s.mass_grid <= 1e-6,
                        fmt("exact %.2e", s.mass_exact) + fmt(", grid %.2e", s.mass_grid)};
       }},
      {"spectral shift positivity", ssf_positivity},
      {"derivative trace positivity", psi_positivity},
      {"power function signs", power_signs},
      {"BMV scalar/commuting exactness", bmv_exact},
      {"BMV generic fits and CM layers", bmv_generic},
      {"CM of derivative traces", cm_derivative_traces},
      {"truncation convergence", truncation_convergence},
      {"verify-all determinism", determinism},
  };
  int failed = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    total += secs;
    failed += !o.pass;
    std::printf("%s %2zu %-40s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("total %.2fs, %d failed\n", total, failed);
  return failed ? 1 : 0;
}
