#include "oslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <string>

#include "oslab/error.hpp"

namespace oslab {

namespace detail {
struct SpectralCache {
  std::once_flag once;
  Eigensystem system;
};
}  // namespace detail

namespace {

constexpr int kMaxSweeps = 100;

void check_symmetric(const Matrix& a) {
  if (!a.square()) {
    throw InvalidArgument("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          ", expected square");
  }
  const double asym = max_asymmetry(a);
  if (asym > kSymmetryTolerance * std::max(1.0, a.max_abs())) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", asym);
    throw InvalidArgument(std::string("matrix is not symmetric: max |A_ij - A_ji| = ") + buf);
  }
}

void rotate(Matrix& a, std::size_t i, std::size_t j, std::size_t k, std::size_t l, double s,
            double tau) {
  const double g = a(i, j);
  const double h = a(k, l);
  a(i, j) = g - s * (h + g * tau);
  a(k, l) = h + s * (g - h * tau);
}

}  // namespace

Eigensystem eigendecompose(const Matrix& input) {
  check_symmetric(input);
  const std::size_t n = input.rows();
  Matrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));

  Matrix v = Matrix::identity(n);
  std::vector<double> d = a.diagonal_values();
  std::vector<double> b = d;
  std::vector<double> z(n, 0.0);

  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == 0.0) break;

    const double threshold = sweep < 4 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 4 && std::abs(d[p]) + g == std::abs(d[p]) &&
            std::abs(d[q]) + g == std::abs(d[q])) {
          a(p, q) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold) continue;

        double h = d[q] - d[p];
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        h = t * apq;
        z[p] -= h;
        z[q] += h;
        d[p] -= h;
        d[q] += h;
        a(p, q) = 0.0;
        for (std::size_t j = 0; j < p; ++j) rotate(a, j, p, j, q, s, tau);
        for (std::size_t j = p + 1; j < q; ++j) rotate(a, p, j, j, q, s, tau);
        for (std::size_t j = q + 1; j < n; ++j) rotate(a, p, j, q, j, s, tau);
        for (std::size_t j = 0; j < n; ++j) rotate(v, j, p, j, q, s, tau);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      b[p] += z[p];
      d[p] = b[p];
      z[p] = 0.0;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  Eigensystem out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = d[src];
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) > 1e-12) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

SymmetricOperator::SymmetricOperator() : cache_(std::make_shared<detail::SpectralCache>()) {}

SymmetricOperator::SymmetricOperator(const Matrix& entries)
    : entries_(entries), cache_(std::make_shared<detail::SpectralCache>()) {
  check_symmetric(entries);
  for (std::size_t i = 0; i < entries_.rows(); ++i) {
    for (std::size_t j = i + 1; j < entries_.cols(); ++j) {
      const double m = 0.5 * (entries(i, j) + entries(j, i));
      entries_(i, j) = entries_(j, i) = m;
    }
  }
}

SymmetricOperator SymmetricOperator::diagonal(std::span<const double> values) {
  return SymmetricOperator(Matrix::diagonal(values));
}

SymmetricOperator SymmetricOperator::scalar(double value) {
  return SymmetricOperator(Matrix(1, 1, value));
}

SymmetricOperator SymmetricOperator::zero(std::size_t dim) { return SymmetricOperator(Matrix(dim, dim)); }

const Eigensystem& SymmetricOperator::spectrum() const {
  std::call_once(cache_->once, [this] { cache_->system = eigendecompose(entries_); });
  return cache_->system;
}

double SymmetricOperator::min_eigenvalue() const {
  const auto& ev = eigenvalues();
  if (ev.empty()) throw InvalidArgument("empty operator has no spectrum");
  return ev.front();
}

double SymmetricOperator::max_eigenvalue() const {
  const auto& ev = eigenvalues();
  if (ev.empty()) throw InvalidArgument("empty operator has no spectrum");
  return ev.back();
}

double SymmetricOperator::norm() const {
  return dim() == 0 ? 0.0 : std::max(std::abs(min_eigenvalue()), std::abs(max_eigenvalue()));
}

SymmetricOperator operator+(const SymmetricOperator& a, const SymmetricOperator& b) {
  return SymmetricOperator(a.entries() + b.entries());
}

SymmetricOperator operator-(const SymmetricOperator& a, const SymmetricOperator& b) {
  return SymmetricOperator(a.entries() - b.entries());
}

SymmetricOperator operator*(double scalar, const SymmetricOperator& a) {
  return SymmetricOperator(scalar * a.entries());
}

SymmetricOperator shifted(const SymmetricOperator& h, const SymmetricOperator& v, double t) {
  if (t == 0.0) return h;
  return SymmetricOperator(h.entries() + t * v.entries());
}

SymmetricOperator apply_function(const SymmetricOperator& h, const std::function<double(double)>& f) {
  const auto& sys = h.spectrum();
  const std::size_t n = h.dim();
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = f(sys.values[i]);
  Matrix out(n, n);
  const Matrix& q = sys.vectors;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * fv[k] * q(j, k);
      out(i, j) = out(j, i) = s;
    }
  }
  return SymmetricOperator(out);
}

namespace {

double norm_from_values(const std::vector<double>& abs_values, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("Schatten exponent must be >= 1, got " + std::to_string(p));
  if (abs_values.empty()) return 0.0;
  const double largest = *std::max_element(abs_values.begin(), abs_values.end());
  if (std::isinf(p) || largest == 0.0) return largest;
  double s = 0.0;
  for (double x : abs_values) s += std::pow(x / largest, p);
  return largest * std::pow(s, 1.0 / p);
}

}  // namespace

double schatten_norm(const SymmetricOperator& a, double p) {
  std::vector<double> abs_values;
  abs_values.reserve(a.dim());
  for (double x : a.eigenvalues()) abs_values.push_back(std::abs(x));
  return norm_from_values(abs_values, p);
}

double schatten_norm(const Matrix& a, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("Schatten exponent must be >= 1, got " + std::to_string(p));
  const Eigensystem gram = eigendecompose(a.transpose() * a);
  std::vector<double> singular;
  singular.reserve(gram.values.size());
  for (double x : gram.values) singular.push_back(std::sqrt(std::max(x, 0.0)));
  return norm_from_values(singular, p);
}

double trace(const SymmetricOperator& a) { return trace(a.entries()); }

SignClass sign_class(const SymmetricOperator& a, double tol) {
  if (a.dim() == 0) return SignClass::psd;
  const double scale = tol * std::max(1.0, a.norm());
  if (a.min_eigenvalue() >= -scale) return SignClass::psd;
  if (a.max_eigenvalue() <= scale) return SignClass::nsd;
  return SignClass::indefinite;
}

SpectralHull spectral_hull(const SymmetricOperator& h, const SymmetricOperator& v, double t_lo,
                           double t_hi, int samples) {
  if (t_lo > t_hi) throw InvalidArgument("spectral_hull: t_lo > t_hi");
  if (samples < 2) throw InvalidArgument("spectral_hull: need at least two samples");
  if (h.dim() != v.dim()) throw InvalidArgument("spectral_hull: dimension mismatch");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = 0; k < samples; ++k) {
    const double t = t_lo + (t_hi - t_lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
    const SymmetricOperator ht = shifted(h, v, t);
    lo = std::min(lo, ht.min_eigenvalue());
    hi = std::max(hi, ht.max_eigenvalue());
  }
  SpectralHull out;
  out.sampled = Interval{lo, hi}.widened(1e-6 * (hi - lo));

  const double vmin = v.min_eigenvalue();
  const double vmax = v.max_eigenvalue();
  double shift_lo = std::numeric_limits<double>::infinity();
  double shift_hi = -shift_lo;
  for (double t : {t_lo, t_hi}) {
    shift_lo = std::min({shift_lo, t * vmin, t * vmax});
    shift_hi = std::max({shift_hi, t * vmin, t * vmax});
  }
  out.weyl = {h.min_eigenvalue() + shift_lo, h.max_eigenvalue() + shift_hi};
  return out;
}

}  // namespace oslab
