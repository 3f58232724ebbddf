#include "oslab/moi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "oslab/error.hpp"

namespace oslab {

void MoiProblem::validate() const {
  const int n = order();
  if (bases.size() != static_cast<std::size_t>(n) + 1) {
    throw InvalidArgument("MOI of order " + std::to_string(n) + " needs " + std::to_string(n + 1) + " bases, got " +
                          std::to_string(bases.size()));
  }
  const std::size_t d = bases.front().dim();
  for (const auto& b : bases)
    if (b.dim() != d) throw InvalidArgument("MOI: base operators have different dimensions");
  for (const auto& v : perturbations) {
    if (v.rows() != d || v.cols() != d) throw InvalidArgument("MOI: perturbation dimension mismatch");
  }
  if (symbol.max_order < n) {
    throw InvalidArgument("MOI: symbol " + symbol.name + " has max_order " + std::to_string(symbol.max_order) +
                          " < " + std::to_string(n));
  }
}

namespace {

double spectral_scale(const MoiProblem& p) {
  double s = 0.0;
  for (const auto& b : p.bases) s = std::max(s, b.norm());
  return s;
}

// Core tensor X[i0][in] in eigen-coordinates.
class Contraction {
 public:
  explicit Contraction(const MoiProblem& p)
      : n_(static_cast<std::size_t>(p.order())), d_(p.bases.front().dim()),
        dd_(p.symbol, cluster_tolerance(spectral_scale(p))), nodes_(n_ + 1), idx_(n_ + 1) {
    for (const auto& b : p.bases) values_.push_back(&b.spectrum().values);
    for (std::size_t k = 0; k < n_; ++k) {
      const Matrix& qa = p.bases[k].spectrum().vectors;
      const Matrix& qb = p.bases[k + 1].spectrum().vectors;
      w_.push_back(qa.transpose() * p.perturbations[k] * qb);
    }
  }

  // Full tensor (d x d).
  Matrix full() {
    Matrix x(d_, d_);
    for (std::size_t i0 = 0; i0 < d_; ++i0) {
      idx_[0] = i0;
      nodes_[0] = (*values_[0])[i0];
      descend(1, 1.0, [&](std::size_t last, double value) { x(i0, last) += value; }, std::nullopt);
    }
    return x;
  }

  // Sum_{i0} X[i0][i0].
  double closed_trace() {
    double t = 0.0;
    for (std::size_t i0 = 0; i0 < d_; ++i0) {
      idx_[0] = i0;
      nodes_[0] = (*values_[0])[i0];
      descend(1, 1.0, [&](std::size_t, double value) { t += value; }, i0);
    }
    return t;
  }

 private:
  template <class Sink>
  void descend(std::size_t level, double partial, Sink&& sink, std::optional<std::size_t> closing) {
    if (level > n_) {
      sink(idx_[n_], partial * dd_(nodes_));
      return;
    }
    const Matrix& w = w_[level - 1];
    const std::size_t prev = idx_[level - 1];
    const std::size_t lo = (level == n_ && closing) ? *closing : 0;
    const std::size_t hi = (level == n_ && closing) ? *closing + 1 : d_;
    for (std::size_t i = lo; i < hi; ++i) {
      const double wij = w(prev, i);
      if (wij == 0.0) continue;
      idx_[level] = i;
      nodes_[level] = (*values_[level])[i];
      descend(level + 1, partial * wij, sink, closing);
    }
  }

  std::size_t n_;
  std::size_t d_;
  DividedDifferences dd_;
  std::vector<const std::vector<double>*> values_;
  std::vector<Matrix> w_;
  std::vector<double> nodes_;
  std::vector<std::size_t> idx_;
};

}  // namespace

Matrix moi_evaluate(const MoiProblem& p) {
  p.validate();
  if (p.order() == 0) return apply_function(p.bases.front(), p.symbol).entries();
  Contraction c(p);
  const Matrix x = c.full();
  return p.bases.front().spectrum().vectors * x * p.bases.back().spectrum().vectors.transpose();
}

double moi_trace(const MoiProblem& p) {
  p.validate();
  if (p.order() == 0) return trace(apply_function(p.bases.front(), p.symbol));
  Contraction c(p);
  if (p.bases.front() == p.bases.back()) return c.closed_trace();
  const Matrix x = c.full();
  const Matrix link = p.bases.back().spectrum().vectors.transpose() * p.bases.front().spectrum().vectors;
  double t = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) t += x(i, j) * link(j, i);
  return t;
}

MoiProblem uniform_problem(const SmoothFunction& f, const SymmetricOperator& h, const Matrix& v, int n) {
  if (n < 0) throw InvalidArgument("MOI order must be non-negative");
  MoiProblem p;
  p.bases.assign(static_cast<std::size_t>(n) + 1, h);
  p.perturbations.assign(static_cast<std::size_t>(n), v);
  p.symbol = f;
  return p;
}

IdentityResidual perturbation_identity_residual(const SmoothFunction& f, int n, const SymmetricOperator& h,
                                                const SymmetricOperator& k, int i,
                                                const std::vector<SymmetricOperator>& bases,
                                                const std::vector<Matrix>& perturbations) {
  if (n < 1) throw InvalidArgument("perturbation identity needs n >= 1");
  if (bases.size() != static_cast<std::size_t>(n) || perturbations.size() != static_cast<std::size_t>(n - 1)) {
    throw InvalidArgument("perturbation identity: expected " + std::to_string(n) + " bases and " +
                          std::to_string(n - 1) + " perturbations");
  }
  if (i < 0 || i >= n) throw InvalidArgument("perturbation identity: insertion index out of range");
  const auto slot = static_cast<std::size_t>(i);

  MoiProblem with_h{bases, perturbations, f};
  with_h.bases[slot] = h;
  MoiProblem with_k{bases, perturbations, f};
  with_k.bases[slot] = k;

  MoiProblem longer;
  longer.symbol = f;
  longer.bases = bases;
  longer.bases[slot] = h;
  longer.bases.insert(longer.bases.begin() + i + 1, k);
  longer.perturbations = perturbations;
  longer.perturbations.insert(longer.perturbations.begin() + i, h.entries() - k.entries());

  const Matrix a = moi_evaluate(with_h);
  const Matrix b = moi_evaluate(with_k);
  const Matrix c = moi_evaluate(longer);
  IdentityResidual r;
  r.residual = (a - b - c).max_abs();
  r.scale = a.max_abs() + b.max_abs() + c.max_abs();
  return r;
}

double trace_bound_ratio(const MoiProblem& p, const std::vector<double>& exponents) {
  p.validate();
  const int n = p.order();
  if (n < 1) throw InvalidArgument("trace_bound_ratio: order must be >= 1");
  if (exponents.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("trace_bound_ratio: need one exponent per perturbation");
  }
  double reciprocal = 0.0;
  for (double a : exponents) {
    if (!(a >= 1.0)) throw InvalidArgument("trace_bound_ratio: exponents must be >= 1");
    reciprocal += std::isinf(a) ? 0.0 : 1.0 / a;
  }
  if (std::abs(reciprocal - 1.0) > 1e-12) throw InvalidArgument("trace_bound_ratio: sum of 1/alpha must be 1");

  double product = 1.0;
  for (std::size_t l = 0; l < exponents.size(); ++l) product *= schatten_norm(p.perturbations[l], exponents[l]);
  if (product == 0.0) return 0.0;

  Interval hull{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& b : p.bases) {
    hull.lo = std::min(hull.lo, b.min_eigenvalue());
    hull.hi = std::max(hull.hi, b.max_eigenvalue());
  }
  double sup = sup_abs_derivative(p.symbol, n, hull);
  for (const auto& b : p.bases)
    for (double lam : b.eigenvalues()) sup = std::max(sup, std::abs(p.symbol.derivative(lam, n)));
  if (sup == 0.0) return 0.0;
  return std::abs(moi_trace(p)) / (sup * product);
}

}  // namespace oslab
