#include "oslab/functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "oslab/error.hpp"

namespace oslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

bool is_nonneg_integer(double p) { return p >= 0.0 && p == std::floor(p) && p < 1e6; }

// Complete Horner scheme: Taylor coefficients of a polynomial about x.
void polynomial_taylor(const std::vector<double>& a, double x, std::span<double> out) {
  std::vector<double> b = a;
  const std::size_t d = b.size() - 1;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > d) {
      out[k] = 0.0;
      continue;
    }
    for (std::size_t j = d; j-- > k;) b[j] += x * b[j + 1];
    out[k] = b[k];
  }
}

}  // namespace

std::string Domain::describe() const {
  return std::string(lo_open ? "(" : "[") + num(lo) + ", " + num(hi) + (hi_open ? ")" : "]");
}

double SmoothFunction::derivative(double x, int k) const {
  if (k < 0 || k > max_order) {
    throw InvalidArgument(name + ": derivative order " + std::to_string(k) + " exceeds max_order " +
                          std::to_string(max_order));
  }
  if (!domain.contains(x)) {
    throw DomainError(name + ": point " + num(x) + " outside domain " + domain.describe(), x);
  }
  std::vector<double> c(static_cast<std::size_t>(k) + 1);
  taylor(x, c);
  return c[static_cast<std::size_t>(k)] * factorial(k);
}

std::vector<double> SmoothFunction::taylor_coefficients(double x, int kmax) const {
  if (kmax < 0 || kmax > max_order) {
    throw InvalidArgument(name + ": derivative order " + std::to_string(kmax) + " exceeds max_order " +
                          std::to_string(max_order));
  }
  if (!domain.contains(x)) {
    throw DomainError(name + ": point " + num(x) + " outside domain " + domain.describe(), x);
  }
  std::vector<double> c(static_cast<std::size_t>(kmax) + 1);
  taylor(x, c);
  return c;
}

// --- builtins ---------------------------------------------------------------

SmoothFunction polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw InvalidArgument("polynomial: empty coefficient list");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw InvalidArgument("polynomial: non-finite coefficient");
  while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();

  SmoothFunction f;
  f.name = "polynomial";
  f.params = {{"coefficients", coefficients}};
  f.max_order = kUnlimitedOrder;
  f.taylor = [a = coefficients](double x, std::span<double> out) { polynomial_taylor(a, x, out); };
  f.analytic_radius = [](double) { return kInf; };
  const std::size_t deg = coefficients.size() - 1;
  const double slope = deg >= 1 ? coefficients[1] : 0.0;
  f.flags.completely_monotone_derivative = deg == 0 || (deg == 1 && slope >= 0.0);
  f.flags.bernstein = f.flags.completely_monotone_derivative && coefficients[0] >= 0.0;
  f.flags.wiener_extendable = deg == 0;
  return f;
}

SmoothFunction monomial(int k, double coeff) {
  if (k < 0) throw InvalidArgument("monomial: negative degree");
  std::vector<double> a(static_cast<std::size_t>(k) + 1, 0.0);
  a.back() = coeff;
  SmoothFunction f = polynomial(std::move(a));
  f.name = "monomial";
  f.params = {{"k", k}, {"coeff", coeff}};
  return f;
}

SmoothFunction exponential(double rate, double coeff, double offset) {
  if (!std::isfinite(rate) || !std::isfinite(coeff) || !std::isfinite(offset)) {
    throw InvalidArgument("exp: non-finite parameter");
  }
  SmoothFunction f;
  f.name = "exp";
  f.params = {{"rate", rate}, {"coeff", coeff}, {"offset", offset}};
  f.max_order = kUnlimitedOrder;
  f.taylor = [rate, coeff, offset](double x, std::span<double> out) {
    if (out.empty()) return;
    double term = coeff * std::exp(rate * x);
    out[0] = term + offset;
    for (std::size_t k = 1; k < out.size(); ++k) {
      term *= rate / static_cast<double>(k);
      out[k] = term;
    }
  };
  f.analytic_radius = [](double) { return kInf; };
  const bool cmd = coeff == 0.0 || rate == 0.0 || (rate < 0.0 && coeff <= 0.0);
  f.flags.completely_monotone_derivative = cmd;
  // On [0, inf) the function increases from coeff + offset when cmd holds.
  f.flags.bernstein = cmd && coeff + offset >= 0.0;
  f.flags.wiener_extendable = rate <= 0.0;
  return f;
}

SmoothFunction neg_exp_decay() {
  SmoothFunction f = exponential(-1.0, -1.0, 0.0);
  f.name = "neg_exp_decay";
  f.params = nlohmann::json::object();
  return f;
}

SmoothFunction shifted_power(double p, double lambda, double coeff) {
  if (!std::isfinite(p) || !std::isfinite(lambda) || !std::isfinite(coeff)) {
    throw InvalidArgument("shifted_power: non-finite parameter");
  }
  SmoothFunction f;
  f.name = "shifted_power";
  f.params = {{"p", p}, {"lambda", lambda}, {"coeff", coeff}};
  f.max_order = kUnlimitedOrder;

  if (is_nonneg_integer(p)) {
    const int deg = static_cast<int>(p);
    f.taylor = [deg, lambda, coeff](double x, std::span<double> out) {
      const double y = x - lambda;
      double binom = 1.0;
      for (std::size_t k = 0; k < out.size(); ++k) {
        const int kk = static_cast<int>(k);
        if (kk > deg) {
          out[k] = 0.0;
          continue;
        }
        if (kk > 0) binom *= static_cast<double>(deg - kk + 1) / kk;
        out[k] = coeff * binom * std::pow(y, deg - kk);
      }
    };
    f.analytic_radius = [](double) { return kInf; };
    f.flags.completely_monotone_derivative = deg == 0 || coeff == 0.0 || (deg == 1 && coeff >= 0.0);
    f.flags.bernstein = f.flags.completely_monotone_derivative && (deg == 0 ? coeff >= 0.0 : true) &&
                        (deg != 1 || -coeff * lambda >= 0.0);
    f.flags.wiener_extendable = deg == 0;
    return f;
  }

  f.domain = Domain{lambda, kInf, true, false};
  f.taylor = [p, lambda, coeff](double x, std::span<double> out) {
    const double y = x - lambda;
    double c = coeff * std::pow(y, p);
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (k > 0) c *= (p - static_cast<double>(k) + 1.0) / (static_cast<double>(k) * y);
      out[k] = c;
    }
  };
  f.analytic_radius = [lambda](double x) { return std::abs(x - lambda); };

  bool cmd = true;
  double ff = 1.0;  // p (p-1) ... (p-k+1)
  for (int k = 1; k <= 64 && cmd; ++k) {
    ff *= p - k + 1;
    const double signed_value = ((k - 1) % 2 == 0 ? 1.0 : -1.0) * coeff * ff;
    if (signed_value < 0.0) cmd = false;
  }
  f.flags.completely_monotone_derivative = cmd || coeff == 0.0;
  f.flags.bernstein = f.flags.completely_monotone_derivative && coeff >= 0.0;
  f.flags.wiener_extendable = p < 0.0;
  return f;
}

SmoothFunction neg_inverse_power(double r, double lambda) {
  if (!(r >= 1.0)) throw InvalidArgument("neg_inverse_power: r must be >= 1, got " + num(r));
  SmoothFunction f = shifted_power(-r, lambda, -1.0);
  f.name = "neg_inverse_power";
  f.params = {{"r", r}, {"lambda", lambda}};
  return f;
}

namespace {

// h_k of the given variables for k = 0..kmax.
void complete_homogeneous(std::span<const double> y, std::vector<double>& h, int kmax) {
  h.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  h[0] = 1.0;
  for (double v : y)
    for (int k = 1; k <= kmax; ++k) h[k] += v * h[k - 1];
}

double truncated_power_dd(int n, double lambda, std::span<const double> x) {
  const std::size_t m = x.size();
  const double nfact = factorial(n);
  std::vector<double> table(m * m, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> h;
  std::vector<double> y;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> double {
    double& slot = table[i * m + j];
    if (!std::isnan(slot)) return slot;
    const int len = static_cast<int>(j - i);
    double value;
    if (x[j] <= lambda) {
      value = 0.0;
    } else if (x[i] >= lambda) {
      if (len > n) {
        value = 0.0;
      } else {
        y.assign(x.begin() + static_cast<std::ptrdiff_t>(i), x.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        for (double& v : y) v -= lambda;
        complete_homogeneous(y, h, n - len);
        value = h[static_cast<std::size_t>(n - len)] / nfact;
      }
    } else {
      value = (self(self, i + 1, j) - self(self, i, j - 1)) / (x[j] - x[i]);
    }
    slot = value;
    return value;
  };
  return rec(rec, 0, m - 1);
}

}  // namespace

SmoothFunction truncated_power(int n, double lambda) {
  if (n < 1) throw InvalidArgument("truncated_power: n must be >= 1, got " + std::to_string(n));
  if (!std::isfinite(lambda)) throw InvalidArgument("truncated_power: non-finite lambda");
  SmoothFunction f;
  f.name = "truncated_power";
  f.params = {{"n", n}, {"lambda", lambda}};
  f.max_order = n;
  f.taylor = [n, lambda](double x, std::span<double> out) {
    const double y = x - lambda;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const int kk = static_cast<int>(k);
      if (y <= 0.0 || kk > n) {
        out[k] = 0.0;
      } else {
        out[k] = std::pow(y, n - kk) / (factorial(kk) * factorial(n - kk));
      }
    }
  };
  f.exact_divided_difference = [n, lambda](std::span<const double> x) { return truncated_power_dd(n, lambda, x); };
  return f;
}

SmoothFunction bump(double center, double radius, double height) {
  if (!std::isfinite(center) || !std::isfinite(height) || !(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("bump: radius must be positive and all parameters finite");
  }
  SmoothFunction f;
  f.name = "bump";
  f.params = {{"center", center}, {"radius", radius}, {"height", height}};
  f.max_order = kUnlimitedOrder;
  f.taylor = [center, radius, height](double x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double u = (x - center) / radius;
    if (!(std::abs(u) < 1.0) || out.empty()) return;
    const std::size_t kmax = out.size() - 1;
    // g(u) = -1/(1-u^2) = -(1/(1-u) + 1/(1+u))/2, expanded about u.
    std::vector<double> g(kmax + 1);
    const double a = 1.0 / (1.0 - u);
    const double b = -1.0 / (1.0 + u);
    double pa = a;
    double pb = -b;
    for (std::size_t k = 0; k <= kmax; ++k) {
      g[k] = -0.5 * (pa + pb);
      pa *= a;
      pb *= b;
    }
    // e^g via (k+1) e_{k+1} = sum_j (j+1) g_{j+1} e_{k-j}.
    std::vector<double> e(kmax + 1, 0.0);
    e[0] = std::exp(g[0]);
    if (e[0] == 0.0) return;
    for (std::size_t k = 0; k < kmax; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j <= k; ++j) s += static_cast<double>(j + 1) * g[j + 1] * e[k - j];
      e[k + 1] = s / static_cast<double>(k + 1);
    }
    double scale = height;
    for (std::size_t k = 0; k <= kmax; ++k) {
      out[k] = std::isfinite(e[k]) ? scale * e[k] : 0.0;
      scale /= radius;
    }
  };
  f.analytic_radius = [center, radius](double x) {
    const double u = std::abs(x - center) / radius;
    return radius * std::abs(1.0 - u);
  };
  f.flags.compact_support = true;
  f.flags.wiener_extendable = true;
  return f;
}

namespace {

double number_param(const nlohmann::json& params, const char* key, double fallback, bool required = false) {
  if (!params.contains(key)) {
    if (required) throw InvalidArgument(std::string("params.") + key + ": missing");
    return fallback;
  }
  const auto& v = params.at(key);
  if (!v.is_number()) throw InvalidArgument(std::string("params.") + key + ": expected a number");
  return v.get<double>();
}

int int_param(const nlohmann::json& params, const char* key, int fallback, bool required = false) {
  const double v = number_param(params, key, fallback, required);
  if (v != std::floor(v)) throw InvalidArgument(std::string("params.") + key + ": expected an integer");
  return static_cast<int>(v);
}

}  // namespace

SmoothFunction builtin(const std::string& name, const nlohmann::json& params) {
  if (!params.is_object()) throw InvalidArgument("params: expected an object");
  if (name == "polynomial") {
    if (!params.contains("coefficients") || !params["coefficients"].is_array()) {
      throw InvalidArgument("params.coefficients: expected an array of numbers");
    }
    std::vector<double> c;
    for (const auto& v : params["coefficients"]) {
      if (!v.is_number()) throw InvalidArgument("params.coefficients: expected an array of numbers");
      c.push_back(v.get<double>());
    }
    return polynomial(std::move(c));
  }
  if (name == "monomial") return monomial(int_param(params, "k", 0, true), number_param(params, "coeff", 1.0));
  if (name == "exp") {
    return exponential(number_param(params, "rate", 1.0), number_param(params, "coeff", 1.0),
                       number_param(params, "offset", 0.0));
  }
  if (name == "neg_exp_decay") return neg_exp_decay();
  if (name == "exp_decay") {
    SmoothFunction f = exponential(-1.0, 1.0, 0.0);
    f.name = name;
    f.params = nlohmann::json::object();
    return f;
  }
  if (name == "one_minus_exp_decay") {
    SmoothFunction f = exponential(-1.0, -1.0, 1.0);
    f.name = name;
    f.params = nlohmann::json::object();
    return f;
  }
  if (name == "shifted_power") {
    return shifted_power(number_param(params, "p", 0.0, true), number_param(params, "lambda", 0.0),
                         number_param(params, "coeff", 1.0));
  }
  if (name == "neg_inverse_power") {
    return neg_inverse_power(number_param(params, "r", 1.0, true), number_param(params, "lambda", 0.0, true));
  }
  if (name == "truncated_power") {
    return truncated_power(int_param(params, "n", 1, true), number_param(params, "lambda", 0.0));
  }
  if (name == "bump") {
    return bump(number_param(params, "center", 0.0), number_param(params, "radius", 1.0),
                number_param(params, "height", 1.0));
  }
  throw InvalidArgument("unknown function '" + name + "'");
}

SmoothFunction builtin_from_spec(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("name") || !spec["name"].is_string()) {
    throw InvalidArgument("function spec: expected {\"name\": ..., \"params\": {...}}");
  }
  return builtin(spec["name"].get<std::string>(), spec.value("params", nlohmann::json::object()));
}

// --- functional calculus ----------------------------------------------------

SymmetricOperator apply_function(const SymmetricOperator& h, const SmoothFunction& f, int order) {
  if (order < 0 || order > f.max_order) {
    throw InvalidArgument(f.name + ": derivative order " + std::to_string(order) + " exceeds max_order " +
                          std::to_string(f.max_order));
  }
  for (double lam : h.eigenvalues()) {
    if (!f.domain.contains(lam)) {
      throw DomainError(f.name + ": eigenvalue " + num(lam) + " outside domain " + f.domain.describe(), lam);
    }
  }
  return apply_function(h, std::function<double(double)>([&](double x) { return f.derivative(x, order); }));
}

// --- divided differences ----------------------------------------------------

std::vector<double> snap_nodes(std::span<const double> nodes, double tol) {
  std::vector<double> x(nodes.begin(), nodes.end());
  std::sort(x.begin(), x.end());
  std::size_t start = 0;
  while (start < x.size()) {
    std::size_t end = start + 1;
    while (end < x.size() && x[end] - x[end - 1] <= tol) ++end;
    if (end - start > 1 && x[end - 1] != x[start]) {
      const double mean =
          std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(start), x.begin() + static_cast<std::ptrdiff_t>(end),
                          0.0) /
          static_cast<double>(end - start);
      std::fill(x.begin() + static_cast<std::ptrdiff_t>(start), x.begin() + static_cast<std::ptrdiff_t>(end), mean);
    }
    start = end;
  }
  return x;
}

namespace {

constexpr int kTaylorTerms = 40;

class Evaluator {
 public:
  Evaluator(const SmoothFunction& f, std::span<const double> x)
      : f_(f), x_(x), m_(x.size()), table_(m_ * m_, std::numeric_limits<double>::quiet_NaN()) {}

  double run() { return rec(0, m_ - 1); }

 private:
  double rec(std::size_t i, std::size_t j) {
    double& slot = table_[i * m_ + j];
    if (!std::isnan(slot)) return slot;
    const int len = static_cast<int>(j - i);
    double value;
    if (x_[i] == x_[j]) {
      value = coefficients_at(x_[i], len)[static_cast<std::size_t>(len)];
    } else if (auto t = taylor_block(i, j)) {
      value = *t;
    } else {
      value = (rec(i + 1, j) - rec(i, j - 1)) / (x_[j] - x_[i]);
    }
    table_[i * m_ + j] = value;
    return value;
  }

  const std::vector<double>& coefficients_at(double x, int order) {
    for (auto& [node, coeffs] : coeff_cache_) {
      if (node == x && static_cast<int>(coeffs.size()) > order) return coeffs;
    }
    coeff_cache_.emplace_back(x, std::vector<double>(m_));
    f_.taylor(x, coeff_cache_.back().second);
    return coeff_cache_.back().second;
  }

  std::optional<double> taylor_block(std::size_t i, std::size_t j) {
    if (!f_.analytic_radius) return std::nullopt;
    const int len = static_cast<int>(j - i);
    const double spread = x_[j] - x_[i];
    const double c = 0.5 * (x_[i] + x_[j]);
    const double radius = f_.analytic_radius(c);
    if (!(spread <= 0.5 && spread <= 0.25 * radius)) return std::nullopt;
    const int terms = std::min(kTaylorTerms, f_.max_order - len);
    if (terms < 8) return std::nullopt;

    std::vector<double> coeffs(static_cast<std::size_t>(len + terms) + 1);
    f_.taylor(c, coeffs);
    std::vector<double> y(x_.begin() + static_cast<std::ptrdiff_t>(i), x_.begin() + static_cast<std::ptrdiff_t>(j) + 1);
    for (double& v : y) v -= c;
    complete_homogeneous(y, h_, terms);
    double sum = 0.0;
    double last = 0.0;
    double before_last = 0.0;
    for (int k = 0; k <= terms; ++k) {
      const double term = coeffs[static_cast<std::size_t>(len + k)] * h_[static_cast<std::size_t>(k)];
      sum += term;
      before_last = last;
      last = term;
    }
    const double tail = std::abs(last) + std::abs(before_last);
    if (!std::isfinite(sum) || tail > 1e-16 * std::abs(sum) + 1e-300) return std::nullopt;
    return sum;
  }

  const SmoothFunction& f_;
  std::span<const double> x_;
  std::size_t m_;
  std::vector<double> table_;
  std::vector<std::pair<double, std::vector<double>>> coeff_cache_;
  std::vector<double> h_;
};

void check_nodes(const SmoothFunction& f, std::span<const double> nodes) {
  if (nodes.empty()) throw InvalidArgument("divided difference needs at least one node");
  const int order = static_cast<int>(nodes.size()) - 1;
  if (order > f.max_order) {
    throw InvalidArgument(f.name + ": divided difference of order " + std::to_string(order) +
                          " exceeds max_order " + std::to_string(f.max_order));
  }
  for (double x : nodes) {
    if (!f.domain.contains(x)) {
      throw DomainError(f.name + ": node " + num(x) + " outside domain " + f.domain.describe(), x);
    }
  }
}

double evaluate_snapped(const SmoothFunction& f, std::span<const double> x) {
  if (f.exact_divided_difference) return f.exact_divided_difference(x);
  return Evaluator(f, x).run();
}

}  // namespace

double divided_difference(const SmoothFunction& f, std::span<const double> nodes) {
  check_nodes(f, nodes);
  double scale = 0.0;
  for (double x : nodes) scale = std::max(scale, std::abs(x));
  const std::vector<double> x = snap_nodes(nodes, cluster_tolerance(scale));
  check_nodes(f, x);
  return evaluate_snapped(f, x);
}

DividedDifferences::DividedDifferences(const SmoothFunction& f, double cluster_tol) : f_(f), tol_(cluster_tol) {}

std::size_t DividedDifferences::KeyHash::operator()(const std::vector<double>& key) const noexcept {
  std::size_t h = key.size();
  for (double v : key) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

double DividedDifferences::operator()(std::span<const double> nodes) {
  std::vector<double> key = snap_nodes(nodes, tol_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  check_nodes(f_, key);
  const double value = evaluate_snapped(f_, key);
  cache_.emplace(std::move(key), value);
  return value;
}

// --- derivative sign sampling ----------------------------------------------

std::string DerivativeSignReport::verdict() const {
  if (completely_monotone) return "completely_monotone";
  if (bernstein) return "bernstein";
  return "neither";
}

namespace {

std::vector<double> sample_grid(Interval grid, int points) {
  if (points < 2) throw InvalidArgument("sign sampling needs at least two grid points");
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    xs[static_cast<std::size_t>(i)] = grid.lo + grid.width() * static_cast<double>(i) / (points - 1);
  }
  return xs;
}

}  // namespace

DerivativeSignReport verify_derivative_signs(const SmoothFunction& f, int k_lo, int k_hi, Interval grid,
                                             int points) {
  if (k_lo < 0 || k_lo > k_hi) throw InvalidArgument("verify_derivative_signs: need 0 <= k_lo <= k_hi");
  if (k_hi > f.max_order) {
    throw InvalidArgument(f.name + ": k_hi " + std::to_string(k_hi) + " exceeds max_order " +
                          std::to_string(f.max_order));
  }
  const std::vector<double> xs = sample_grid(grid, points);
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(xs.size());
  for (double x : xs) coeffs.push_back(f.taylor_coefficients(x, k_hi));

  DerivativeSignReport report;
  report.completely_monotone = true;
  report.bernstein = true;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double kf = factorial(k);
    std::vector<double> v(xs.size());
    double vmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      v[i] = coeffs[i][static_cast<std::size_t>(k)] * kf;
      vmax = std::max(vmax, std::abs(v[i]));
    }
    const double tol = 1e-12 * vmax;
    DerivativeSignRow row;
    row.order = k;
    row.min_alternating = kInf;
    row.min_bernstein = kInf;
    const double alt = k % 2 == 0 ? 1.0 : -1.0;
    const double bern = k == 0 ? 1.0 : -alt;
    std::optional<std::size_t> last_nonzero;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      row.min_alternating = std::min(row.min_alternating, alt * v[i]);
      row.min_bernstein = std::min(row.min_bernstein, bern * v[i]);
      if (std::abs(v[i]) <= tol) continue;
      if (last_nonzero && !row.sign_change && (v[*last_nonzero] > 0.0) != (v[i] > 0.0)) {
        const double x0 = xs[*last_nonzero];
        const double x1 = xs[i];
        const double y0 = v[*last_nonzero];
        const double y1 = v[i];
        row.sign_change = x0 + (x1 - x0) * y0 / (y0 - y1);
      }
      last_nonzero = i;
    }
    if (row.min_alternating < -tol) report.completely_monotone = false;
    if (row.min_bernstein < -tol) report.bernstein = false;
    report.rows.push_back(row);
  }
  return report;
}

bool flags_consistent(const SmoothFunction& f, Interval grid, int orders) {
  const int k_hi = std::min(orders, f.max_order);
  if (f.flags.completely_monotone_derivative && k_hi >= 1) {
    const auto report = verify_derivative_signs(f, 1, k_hi, grid, 101);
    if (!report.bernstein) return false;
  }
  if (f.flags.bernstein) {
    const Interval nonneg{std::max(grid.lo, 0.0), std::max(grid.hi, 0.0)};
    if (nonneg.width() > 0.0) {
      const auto report = verify_derivative_signs(f, 0, std::max(k_hi, 0), nonneg, 101);
      if (!report.bernstein) return false;
    }
  }
  return true;
}

double sup_abs_derivative(const SmoothFunction& f, int k, Interval interval, int points) {
  if (interval.width() == 0.0) return std::abs(f.derivative(interval.lo, k));
  double best = 0.0;
  for (double x : sample_grid(interval, std::max(points, 2))) best = std::max(best, std::abs(f.derivative(x, k)));
  return best;
}

}  // namespace oslab
