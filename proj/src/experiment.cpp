#include "oslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "oslab/bmv.hpp"
#include "oslab/derivatives.hpp"
#include "oslab/functions.hpp"
#include "oslab/matrix_io.hpp"
#include "oslab/parallel.hpp"
#include "oslab/random.hpp"
#include "oslab/ssf.hpp"
#include "oslab/truncation.hpp"

namespace oslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Path-aware accessors for a JSON object.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }
  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError(at(key), "missing required field");
    return j_[key];
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(at(key), "must be positive");
    return v;
  }

  long long integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v.get<long long>();
  }
  int integer(const std::string& key, int lo, int hi, std::optional<int> fallback = std::nullopt) const {
    if (!has(key)) {
      if (!fallback) throw ConfigError(at(key), "missing required field");
      return *fallback;
    }
    const long long v = integer(key);
    if (v < lo || v > hi) {
      throw ConfigError(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
  }

  std::optional<std::uint64_t> seed(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError(at(key), "expected a non-negative integer");
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (!fallback) throw ConfigError(at(key), "missing required field");
      return *fallback;
    }
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  Fields child(const std::string& key) const { return Fields(raw(key), at(key)); }
  std::optional<Fields> optional_child(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Fields(raw(key), at(key));
  }

  const json& value() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

const json& empty_object() {
  static const json e = json::object();
  return e;
}

Fields child_or_empty(const Fields& f, const std::string& key) {
  if (f.has(key)) return f.child(key);
  return Fields(empty_object(), f.at(key));
}

// Grid: explicit array, or {"min", "max", "points", "spacing": "linear" | "log"}.
std::vector<double> parse_grid(const Fields& parent, const std::string& key, std::vector<double> fallback) {
  if (!parent.has(key)) return fallback;
  const json& g = parent.raw(key);
  const std::string path = parent.at(key);
  if (g.is_array()) {
    std::vector<double> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(g[i].get<double>());
    }
    if (out.empty()) throw ConfigError(path, "grid is empty");
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (!(out[i] > out[i - 1])) throw ConfigError(path, "grid must be strictly increasing");
    }
    return out;
  }
  const Fields f(g, path);
  const double lo = f.number("min");
  const double hi = f.number("max");
  const int points = f.integer("points", 2, 1 << 20);
  const std::string spacing = f.string("spacing", std::string("linear"));
  if (!(hi > lo)) throw ConfigError(f.at("max"), "must exceed min");
  if (spacing == "log") {
    if (!(lo > 0.0)) throw ConfigError(f.at("min"), "log spacing needs a positive minimum");
    return log_grid(lo, hi, points);
  }
  if (spacing != "linear") throw ConfigError(f.at("spacing"), "expected 'linear' or 'log'");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return out;
}

std::vector<double> linear(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return out;
}

SmoothFunction parse_function(const Fields& config, const std::string& fallback) {
  if (!config.has("function")) return builtin(fallback);
  const Fields f = config.child("function");
  const std::string name = f.string("name");
  try {
    return builtin(name, f.has("params") ? f.raw("params") : json::object());
  } catch (const InvalidArgument& e) {
    throw ConfigError(config.at("function"), e.what());
  }
}

DiagonalModel parse_model(const Fields& f) {
  DiagonalModel m;
  m.m = f.number("m", 0.0);
  m.gamma = f.number("gamma", 1.0);
  m.rho = f.number("rho", 0.5);
  m.scale = f.number("scale", 1.0);
  if (f.has("kernel")) {
    try {
      m.kernel = kernel_from_string(f.string("kernel"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(f.at("kernel"), e.what());
    }
  }
  if (!(m.gamma > 0.0)) throw ConfigError(f.at("gamma"), "must be positive");
  if (!(m.rho > 0.0 && m.rho < 1.0)) throw ConfigError(f.at("rho"), "must lie in (0, 1)");
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  writer(out);
}

double relative(double diff, double scale) { return scale > 0.0 ? diff / scale : diff; }

json verdicts_json(const std::vector<Verdict>& vs) {
  json arr = json::array();
  for (const auto& v : vs) {
    arr.push_back({{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"tolerance", v.tolerance}});
  }
  return arr;
}

void add(RunResult& r, std::string name, double value, double tolerance, bool pass) {
  r.verdicts.push_back({std::move(name), pass, value, tolerance});
  r.pass = r.pass && pass;
}

void add_le(RunResult& r, std::string name, double value, double tolerance) {
  add(r, std::move(name), value, tolerance, value <= tolerance);
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double trace_power(const SymmetricOperator& v, int n) {
  double s = 0.0;
  for (double x : v.eigenvalues()) s += std::pow(x, n);
  return s;
}

// --- commands -----------------------------------------------------------------

struct Context {
  Fields config;
  RunOptions options;
  std::uint64_t seed = 0;
  Instance instance;
};

void run_derivative(Context& c, RunResult& r) {
  const Fields tol = child_or_empty(c.config, "tolerances");
  const SmoothFunction f = parse_function(c.config, "exp");
  const int k = c.config.integer("order", 0, 8, 1);
  const double s = c.config.number("s", 0.0);
  const double fd_tol = tol.positive("fd", 1e-6);
  const double sign_tol = tol.positive("sign", 1e-8);
  const std::vector<double> s_grid = parse_grid(c.config, "s_grid", linear(0.0, 1.0, 11));
  const auto& h = c.instance.h;
  const auto& v = c.instance.v;

  const Matrix d = operator_derivative(f, h, v, k, s);
  const Matrix oracle = finite_difference_oracle(f, h, v, k, s, default_fd_step(k, v));
  const double err = relative(max_abs_diff(d, oracle), oracle.max_abs());
  add_le(r, "fd_oracle_relative_error", err, fd_tol);

  json psi_block = nullptr;
  if (k >= 1) {
    const auto rep = derivative_trace_sign_check(f, h, v, k, s_grid, sign_tol);
    const bool asserted = rep.hypothesis_holds && rep.check.expected != SignExpectation::none;
    if (asserted) add(r, "psi_sign", rep.check.worst_margin, -sign_tol, rep.check.pass);
    write_file(c.options.out_dir / "psi.csv", [&](std::ostream& out) {
      out << "s,psi,order,seed\n";
      for (std::size_t i = 0; i < s_grid.size(); ++i) {
        out << format_double(s_grid[i]) << ',' << format_double(rep.values[i]) << ',' << k << ',' << c.seed << '\n';
      }
    });
    psi_block = {{"expected", to_string(rep.check.expected)},
                 {"asserted", asserted},
                 {"worst_margin", rep.check.worst_margin}};
  }
  save_matrix(c.options.out_dir / "derivative.csv", d);
  r.summary["derivative"] = {{"order", k}, {"s", s}, {"function", f.spec()}, {"psi", psi_block}};
}

void run_remainder(Context& c, RunResult& r) {
  const Fields tol = child_or_empty(c.config, "tolerances");
  const SmoothFunction f = parse_function(c.config, "exp");
  const int n = c.config.integer("order", 1, 8, 2);
  const double agree = tol.positive("agree", 1e-8);
  const double quad_tol = tol.positive("quad", 1e-8);
  const auto& h = c.instance.h;
  const auto& v = c.instance.v;

  const double direct = taylor_remainder_direct_trace(f, h, v, n);
  const double perturbation =
      n >= 2 ? taylor_remainder_via_perturbation_trace(f, h, v, n) : trace(first_order_remainder(f, h, v));
  const QuadratureResult integral = remainder_trace_integral(f, h, v, n, quad_tol);
  const double scale = std::max({1.0, std::abs(direct), std::abs(perturbation), std::abs(integral.value)});
  const double bound = std::max(agree, quad_tol);
  add_le(r, "direct_vs_perturbation", std::abs(direct - perturbation) / scale, bound);
  add_le(r, "direct_vs_integral", std::abs(direct - integral.value) / scale, bound);
  add_le(r, "perturbation_vs_integral", std::abs(perturbation - integral.value) / scale, bound);
  write_file(c.options.out_dir / "remainder.csv", [&](std::ostream& out) {
    out << "form,trace,order,seed\n";
    out << "direct," << format_double(direct) << ',' << n << ',' << c.seed << '\n';
    out << "perturbation," << format_double(perturbation) << ',' << n << ',' << c.seed << '\n';
    out << "integral," << format_double(integral.value) << ',' << n << ',' << c.seed << '\n';
  });
  r.summary["remainder"] = {{"order", n}, {"function", f.spec()}, {"quadrature_points", integral.points}};
}

void run_ssf(Context& c, RunResult& r) {
  const Fields tol = child_or_empty(c.config, "tolerances");
  const int n = c.config.integer("order", 1, 8, 2);
  const int grid_size = c.config.integer("grid_size", 16, 1 << 20, 2048);
  const double pos_tol = tol.positive("positivity", 1e-8);
  const double mass_tol = tol.positive("mass", 1e-6);
  const double grid_tol = tol.positive("closure_grid", 1e-3);
  const double moment_tol = tol.positive("closure_moment", 1e-6);
  const auto& h = c.instance.h;
  const auto& v = c.instance.v;

  const SSFEstimate est = ssf_density(h, v, n, grid_size);
  const SignClass vs = sign_class(v);
  const PositivityVerdict pv = positivity_verdict(est, vs, n, pos_tol);
  if (pv.asserted) add(r, "positivity", pv.worst_margin, -pos_tol, pv.pass);

  const double exact_mass = trace_power(v, n) / factorial(n);
  const double mass = ssf_mass(est);
  add_le(r, "mass_relative_error", relative(std::abs(mass - exact_mass), std::abs(exact_mass)), mass_tol);

  json closure = nullptr;
  if (!c.config.boolean("skip_closure", false)) {
    const SmoothFunction f = parse_function(c.config, "exp");
    const double exact = RemainderTraceExpansion(h, v, n)(f);
    const double via_grid = ssf_grid_integral(f, est);
    const MomentIntegral via_moments = ssf_moment_integral(f, h, v, n);
    const double scale = std::abs(exact);
    add_le(r, "closure_grid_relative_error", relative(std::abs(via_grid - exact), scale), grid_tol);
    add_le(r, "closure_moment_relative_error", relative(std::abs(via_moments.value - exact), scale), moment_tol);
    closure = {{"function", f.spec()},
               {"trace", exact},
               {"grid", via_grid},
               {"moment", via_moments.value},
               {"moment_degree", via_moments.degree},
               {"moment_converged", via_moments.converged}};
  }
  write_file(c.options.out_dir / "ssf.csv", [&](std::ostream& out) { write_ssf_csv(out, est, c.seed); });
  r.summary["ssf"] = {{"order", n},
                      {"v_sign", vs == SignClass::psd ? "psd" : vs == SignClass::nsd ? "nsd" : "indefinite"},
                      {"expected", to_string(pv.expected)},
                      {"observed", to_string(est.verdict)},
                      {"margin", est.margin},
                      {"mass", mass},
                      {"exact_mass", exact_mass},
                      {"closure", closure}};
}

DictionarySpec parse_dictionary(const Fields& config) {
  DictionarySpec spec;
  if (const auto d = config.optional_child("dictionary")) {
    spec.s_min = d->number("s_min", 0.0);
    spec.s_max = d->number("s_max", 0.0);
    spec.per_decade = d->integer("per_decade", 1, 10000, 200);
    spec.refine = d->boolean("refine", true);
  }
  return spec;
}

void run_bmv(Context& c, RunResult& r) {
  const Fields tol = child_or_empty(c.config, "tolerances");
  const std::string mode = c.config.string("mode", std::string("heat_resolvent"));
  const std::vector<double> t_grid = parse_grid(c.config, "t_grid", log_grid(0.05, 20.0, 64));
  if (t_grid.front() <= 0.0) throw ConfigError(c.config.at("t_grid"), "t values must be positive");
  const double residual_tol = tol.positive("residual", 1e-4);
  const int cm_order = c.config.integer("cm_order", 2, 12, 4);
  const DictionarySpec dict = parse_dictionary(c.config);
  const auto& h = c.instance.h;
  const auto& v = c.instance.v;
  if (sign_class(v) != SignClass::psd) throw ConfigError("instance", "bmv needs a positive semidefinite V");

  const fs::path& out = c.options.out_dir;
  if (mode == "heat_resolvent") {
    const double lambda = c.config.number("lambda", h.min_eigenvalue() - 1.0);
    const double rr = c.config.positive("r", 1.0);
    if (!(lambda < h.min_eigenvalue())) throw ConfigError(c.config.at("lambda"), "must lie below lambda_min(H)");
    const HeatResolventResult res = heat_and_resolvent_cases(h, v, t_grid, lambda, rr, cm_order, dict);
    add(r, "heat_cm", res.heat_cm.verdict ? 1.0 : 0.0, 1.0, res.heat_cm.verdict);
    add(r, "resolvent_cm", res.resolvent_cm.verdict ? 1.0 : 0.0, 1.0, res.resolvent_cm.verdict);
    add_le(r, "heat_fit_residual", res.heat.residual_rel, residual_tol);
    add_le(r, "resolvent_fit_residual", res.resolvent.residual_rel, residual_tol);
    write_file(out / "fit_heat.json", [&](std::ostream& o) { write_fit_json(o, res.heat); });
    write_file(out / "fit_resolvent.json", [&](std::ostream& o) { write_fit_json(o, res.resolvent); });
    write_file(out / "cm_heat.csv", [&](std::ostream& o) { write_cm_report_csv(o, res.heat_cm); });
    write_file(out / "cm_resolvent.csv", [&](std::ostream& o) { write_cm_report_csv(o, res.resolvent_cm); });
    r.summary["bmv"] = {{"mode", mode}, {"lambda", lambda}, {"r", rr}, {"atoms_heat", res.heat.pair.atoms.size()},
                        {"atoms_resolvent", res.resolvent.pair.atoms.size()}};
  } else if (mode == "remainder_laplace") {
    const SmoothFunction f = parse_function(c.config, "neg_exp_decay");
    const int n = c.config.integer("order", 1, 8, 1);
    const RemainderLaplaceResult res = remainder_laplace_check(f, h, v, n, t_grid, cm_order, dict);
    add(r, "remainder_cm", res.report.verdict ? 1.0 : 0.0, 1.0, res.report.verdict);
    add_le(r, "remainder_fit_residual", res.fit.residual_rel, residual_tol);
    double min_w = std::numeric_limits<double>::infinity();
    for (const Atom& a : res.fit.pair.atoms) min_w = std::min(min_w, a.w);
    if (res.fit.pair.atoms.empty()) min_w = 0.0;
    add(r, "remainder_weights_nonnegative", min_w, 0.0, min_w >= 0.0);
    write_file(out / "fit_remainder.json", [&](std::ostream& o) { write_fit_json(o, res.fit); });
    write_file(out / "cm_remainder.csv", [&](std::ostream& o) { write_cm_report_csv(o, res.report); });
    r.summary["bmv"] = {{"mode", mode}, {"order", n}, {"sign", res.sign}, {"function", f.spec()}};
  } else {
    throw ConfigError(c.config.at("mode"), "expected 'heat_resolvent' or 'remainder_laplace'");
  }
}

std::vector<int> parse_p_list(const Fields& config) {
  if (!config.has("p_list")) return {4, 8, 16, 32};
  const json& arr = config.raw("p_list");
  if (!arr.is_array()) throw ConfigError(config.at("p_list"), "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer() || arr[i].get<long long>() < 1 || arr[i].get<long long>() > 4096) {
      throw ConfigError(config.at("p_list") + "[" + std::to_string(i) + "]", "expected an integer in [1, 4096]");
    }
    out.push_back(arr[i].get<int>());
    if (i > 0 && out[i] <= out[i - 1]) throw ConfigError(config.at("p_list"), "must be strictly ascending");
  }
  if (out.size() < 2) throw ConfigError(config.at("p_list"), "needs at least two entries");
  return out;
}

void run_truncation(Context& c, RunResult& r) {
  const Fields inst = c.config.child("instance");
  if (inst.string("kind") != "diagonal_model") {
    throw ConfigError(inst.at("kind"), "truncation needs a diagonal_model instance");
  }
  const DiagonalModel model = parse_model(inst);
  const int n = c.config.integer("order", 1, 6, 2);
  const std::vector<int> p_list = parse_p_list(c.config);
  const std::string study = c.config.string("study", std::string("ssf"));
  const int jobs = c.options.jobs;

  if (study == "ssf") {
    const int grid_size = c.config.integer("grid_size", 16, 1 << 20, 4096);
    const SsfStudy s = ssf_convergence_study(model, n, p_list, grid_size, jobs);
    add(r, "l1_error_decreasing", s.decreasing ? 1.0 : 0.0, 1.0, s.decreasing);
    const double second = s.rows[s.rows.size() - 2].l1_error;
    add_le(r, "l1_error_over_mass", relative(second, std::abs(s.mass)), 1e-3);
    add(r, "positivity_each_p", s.signs_ok ? 1.0 : 0.0, 1.0, s.signs_ok);
    write_file(c.options.out_dir / "truncation.csv", [&](std::ostream& o) { write_study_csv(o, s.rows); });
    r.summary["truncation"] = {{"study", study}, {"order", n}, {"mass", s.mass}, {"c_emp", s.c_emp}};
  } else if (study == "derivative") {
    const SmoothFunction f = parse_function(c.config, "neg_exp_decay");
    const std::vector<double> s_grid = parse_grid(c.config, "s_grid", linear(0.0, 1.0, 11));
    const DerivativeStudy s = derivative_trace_truncation_study(model, f, n, p_list, s_grid, jobs);
    add(r, "cauchy_decay", s.cauchy ? 1.0 : 0.0, 1.0, s.cauchy);
    add(r, "sign_each_p", s.signs_ok ? 1.0 : 0.0, 1.0, s.signs_ok);
    write_file(c.options.out_dir / "truncation.csv", [&](std::ostream& o) { write_study_csv(o, s.rows); });
    r.summary["truncation"] = {{"study", study}, {"order", n}, {"function", f.spec()}};
  } else {
    throw ConfigError(c.config.at("study"), "expected 'ssf' or 'derivative'");
  }
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"derivative", "remainder", "ssf", "bmv", "truncation", "verify-all"};
  return c;
}

RunResult execute_single(const json& config, const RunOptions& options);

RunResult execute_suite(const Fields& config, const RunOptions& options, std::uint64_t base_seed) {
  const json suite = config.has("suite") ? config.raw("suite") : default_suite();
  if (!suite.is_array() || suite.empty()) throw ConfigError(config.at("suite"), "expected a non-empty array");
  const std::size_t count = suite.size();

  // Validate everything before any work starts, so config errors stay exit 2.
  std::vector<json> configs(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string path = "suite[" + std::to_string(i) + "]";
    if (!suite[i].is_object()) throw ConfigError(path, "expected an object");
    json sub = suite[i];
    if (!sub.contains("schema")) sub["schema"] = kConfigSchema;
    if (!sub.contains("seed")) sub["seed"] = instance_seed(base_seed, i);
    if (sub.value("command", "") == "verify-all") throw ConfigError(path + ".command", "suites cannot nest");
    try {
      validate_config(sub);
    } catch (const ConfigError& e) {
      throw ConfigError(path + "." + e.path(), std::string(e.what()).substr(e.path().size() + 2));
    }
    configs[i] = std::move(sub);
  }

  std::vector<RunResult> results(count);
  std::vector<std::string> names(count);
  for (std::size_t i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03zu_", i);
    names[i] = buf + configs[i]["command"].get<std::string>();
  }
  parallel_for(count, options.jobs, [&](std::size_t i) {
    RunOptions sub = options;
    sub.out_dir = options.out_dir / names[i];
    sub.jobs = 1;
    sub.log = nullptr;
    sub.seed.reset();
    fs::create_directories(sub.out_dir);
    try {
      results[i] = execute_single(configs[i], sub);
    } catch (const ConfigError& e) {
      throw ConfigError("suite[" + std::to_string(i) + "]." + e.path(),
                        std::string(e.what()).substr(e.path().size() + 2));
    }
    if (!results[i].pass && results[i].instance) {
      // replay lives next to the failing run
      const fs::path dir = sub.out_dir / "replay";
      fs::create_directories(dir);
      save_matrix(dir / "h.json", results[i].instance->h.entries());
      save_matrix(dir / "v.json", results[i].instance->v.entries());
      json replay = configs[i];
      if (replay["command"] != "truncation") replay["instance"] = {{"kind", "file"}, {"h", "h.json"}, {"v", "v.json"}};
      write_text(dir / "replay.json", replay.dump(2) + "\n");
    }
  });

  RunResult out;
  out.command = "verify-all";
  json runs = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    add(out, names[i], results[i].pass ? 1.0 : 0.0, 1.0, results[i].pass);
    runs.push_back({{"name", names[i]}, {"pass", results[i].pass}});
  }
  write_file(options.out_dir / "verify_all.csv", [&](std::ostream& o) {
    o << "index,name,command,pass\n";
    for (std::size_t i = 0; i < count; ++i) {
      o << i << ',' << names[i] << ',' << results[i].command << ',' << (results[i].pass ? 1 : 0) << '\n';
    }
  });
  out.summary["runs"] = runs;
  if (options.log) {
    for (std::size_t i = 0; i < count; ++i) {
      *options.log << (results[i].pass ? "PASS " : "FAIL ") << names[i] << '\n';
      for (const auto& v : results[i].verdicts) {
        if (!v.pass) *options.log << "  " << v.name << " = " << format_double(v.value) << '\n';
      }
    }
  }
  return out;
}

RunResult execute_single(const json& config, const RunOptions& options) {
  validate_config(config);
  const Fields root(config, "");
  const std::string command = root.string("command");

  std::optional<std::uint64_t> seed = options.seed;
  if (!seed) seed = root.seed("seed");

  RunResult r;
  r.command = command;
  fs::create_directories(options.out_dir);

  if (command == "verify-all") {
    r = execute_suite(root, options, seed.value_or(0));
  } else {
    Context c{root, options, 0, {}};
    if (command != "truncation") {
      c.instance = generate_instance(root.raw("instance"), seed, options.base_dir, "instance");
    } else {
      const Fields inst = root.child("instance");
      DiagonalModel model = parse_model(inst);
      const int p = parse_p_list(root).back();
      auto [h, v] = truncate(model, p);
      c.instance = {std::move(h), std::move(v), inst.value()};
    }
    if (c.instance.spec.contains("seed")) c.seed = c.instance.spec["seed"].get<std::uint64_t>();
    else if (seed) c.seed = *seed;

    if (command == "derivative") {
      run_derivative(c, r);
    } else if (command == "remainder") {
      run_remainder(c, r);
    } else if (command == "ssf") {
      run_ssf(c, r);
    } else if (command == "bmv") {
      run_bmv(c, r);
    } else {
      run_truncation(c, r);
    }
    r.summary["instance"] = c.instance.spec;
    r.summary["dim"] = c.instance.h.dim();
    r.instance = std::move(c.instance);
  }
  r.summary["command"] = command;
  r.summary["pass"] = r.pass;
  r.summary["verdicts"] = verdicts_json(r.verdicts);
  write_text(options.out_dir / "summary.json", r.summary.dump(2) + "\n");
  return r;
}

}  // namespace

Instance generate_instance(const json& spec, std::optional<std::uint64_t> seed, const fs::path& base_dir,
                           const std::string& path) {
  const Fields f(spec, path);
  const std::string kind = f.string("kind");
  Instance inst;
  inst.spec = spec;
  auto need_seed = [&]() -> std::uint64_t {
    if (auto s = f.seed("seed")) return *s;
    if (seed) {
      inst.spec["seed"] = *seed;
      return *seed;
    }
    throw ConfigError(f.at("seed"), "random instances need a seed");
  };
  auto dim = [&] { return static_cast<std::size_t>(f.integer("dim", 1, 512)); };

  if (kind == "random_psd_pair") {
    const std::size_t d = dim();
    const std::uint64_t s = need_seed();
    const std::string variant = f.string("variant", std::string("psd"));
    if (variant == "psd") {
      std::tie(inst.h, inst.v) = random_psd_pair(d, s);
    } else if (variant == "nsd") {
      std::tie(inst.h, inst.v) = random_nsd_pair(d, s);
    } else {
      throw ConfigError(f.at("variant"), "expected 'psd' or 'nsd'");
    }
  } else if (kind == "random_goe") {
    const std::size_t d = dim();
    std::tie(inst.h, inst.v) = random_goe_pair(d, need_seed());
  } else if (kind == "diagonal_model") {
    const int p = f.integer("p", 1, 4096);
    std::tie(inst.h, inst.v) = truncate(parse_model(f), p);
  } else if (kind == "file") {
    auto load = [&](const std::string& key) {
      fs::path p = f.string(key);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      if (!fs::exists(p)) throw ConfigError(f.at(key), "file '" + p.string() + "' does not exist");
      try {
        return SymmetricOperator(load_matrix(p));
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidArgument& e) {
        throw ConfigError(f.at(key), e.what());
      }
    };
    inst.h = load("h");
    inst.v = load("v");
    if (inst.h.dim() != inst.v.dim()) throw ConfigError(path, "h and v have different dimensions");
  } else {
    throw ConfigError(f.at("kind"), "expected random_goe, random_psd_pair, diagonal_model or file");
  }
  if (f.has("v_scale")) {
    const double sc = f.number("v_scale");
    inst.v = sc * inst.v;
  }
  return inst;
}

void validate_config(const json& config) {
  const Fields root(config, "");
  if (!root.has("schema")) throw ConfigError("schema", "missing required field");
  if (!config["schema"].is_number_integer() || config["schema"].get<long long>() != kConfigSchema) {
    throw ConfigError("schema", "unsupported schema version (expected " + std::to_string(kConfigSchema) + ")");
  }
  const std::string command = root.string("command");
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    throw ConfigError("command", "unknown command '" + command + "'");
  }
  if (command != "verify-all" && !root.has("instance")) throw ConfigError("instance", "missing required field");
  if (root.has("tolerances")) {
    const Fields tol = root.child("tolerances");
    for (const auto& [key, value] : config["tolerances"].items()) {
      if (!value.is_number() || !(value.get<double>() > 0.0)) throw ConfigError(tol.at(key), "must be a positive number");
    }
  }
  root.seed("seed");
}

RunResult execute(const json& config, const RunOptions& options) { return execute_single(config, options); }

int run(const json& config, const RunOptions& options, std::ostream& err) {
  RunResult r;
  try {
    r = execute_single(config, options);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (r.pass) return 0;
  if (r.instance) {
    const fs::path dir = options.out_dir / "replay";
    fs::create_directories(dir);
    save_matrix(dir / "h.json", r.instance->h.entries());
    save_matrix(dir / "v.json", r.instance->v.entries());
    json replay = config;
    if (options.seed) replay["seed"] = *options.seed;
    if (r.command != "truncation") replay["instance"] = {{"kind", "file"}, {"h", "h.json"}, {"v", "v.json"}};
    write_text(dir / "replay.json", replay.dump(2) + "\n");
    err << "verdict failed; replay written to " << (dir / "replay.json").string() << '\n';
  }
  for (const auto& v : r.verdicts) {
    if (!v.pass) err << "FAIL " << v.name << ": " << format_double(v.value) << " vs " << format_double(v.tolerance) << '\n';
  }
  return 1;
}

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

json default_suite() {
  json suite = json::array();
  auto psd = [](int dim) { return json{{"kind", "random_psd_pair"}, {"dim", dim}}; };
  auto nsd = [](int dim) { return json{{"kind", "random_psd_pair"}, {"dim", dim}, {"variant", "nsd"}}; };
  suite.push_back({{"command", "derivative"}, {"instance", psd(4)}, {"order", 2}});
  suite.push_back({{"command", "derivative"},
                   {"instance", psd(3)},
                   {"order", 3},
                   {"function", {{"name", "bump"}, {"params", {{"center", 0.0}, {"radius", 3.0}}}}}});
  suite.push_back({{"command", "remainder"}, {"instance", psd(4)}, {"order", 3}});
  suite.push_back({{"command", "remainder"}, {"instance", json{{"kind", "random_goe"}, {"dim", 3}}}, {"order", 2}});
  suite.push_back({{"command", "ssf"}, {"instance", psd(4)}, {"order", 2}});
  suite.push_back({{"command", "ssf"}, {"instance", nsd(4)}, {"order", 3}});
  suite.push_back({{"command", "bmv"}, {"instance", psd(3)}});
  suite.push_back({{"command", "bmv"}, {"instance", psd(3)}, {"mode", "remainder_laplace"}, {"order", 2}});
  suite.push_back({{"command", "truncation"},
                   {"instance", {{"kind", "diagonal_model"}, {"m", 0.0}, {"gamma", 1.0}, {"rho", 0.5}}},
                   {"order", 2},
                   {"p_list", {4, 8, 16, 32}}});
  return suite;
}

}  // namespace oslab
