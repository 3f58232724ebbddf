#include "oslab/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oslab/error.hpp"

namespace oslab {

std::vector<double> least_squares(const Matrix& input, const std::vector<double>& rhs) {
  const std::size_t m = input.rows();
  const std::size_t n = input.cols();
  if (rhs.size() != m) throw InvalidArgument("least_squares: right-hand side has the wrong length");
  if (m < n) throw InvalidArgument("least_squares: underdetermined system");
  Matrix a = input;
  std::vector<double> b = rhs;
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm = std::hypot(norm, a(i, k));
    if (norm == 0.0) continue;
    const double alpha = a(k, k) > 0.0 ? -norm : norm;
    std::vector<double> u(m - k);
    for (std::size_t i = k; i < m; ++i) u[i - k] = a(i, k);
    u[0] -= alpha;
    double unorm2 = 0.0;
    for (double x : u) unorm2 += x * x;
    if (unorm2 == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += u[i - k] * a(i, j);
      s *= 2.0 / unorm2;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= s * u[i - k];
    }
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += u[i - k] * b[i];
    s *= 2.0 / unorm2;
    for (std::size_t i = k; i < m; ++i) b[i] -= s * u[i - k];
  }
  std::vector<double> x(n, 0.0);
  double rmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) rmax = std::max(rmax, std::abs(a(k, k)));
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = std::abs(a(k, k)) > 1e-14 * rmax ? s / a(k, k) : 0.0;
  }
  return x;
}

NnlsResult nnls(const Matrix& a_in, const std::vector<double>& b, int max_iterations) {
  const std::size_t m = a_in.rows();
  const std::size_t n = a_in.cols();
  if (b.size() != m) throw InvalidArgument("nnls: right-hand side has the wrong length");
  if (max_iterations <= 0) max_iterations = 3 * static_cast<int>(n);

  Matrix a = a_in;
  std::vector<double> scale(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s = std::hypot(s, a(i, j));
    if (s > 0.0) {
      scale[j] = s;
      for (std::size_t i = 0; i < m; ++i) a(i, j) /= s;
    }
  }

  std::vector<double> x(n, 0.0);
  std::vector<char> passive(n, 0);
  std::vector<double> residual = b;
  auto residual_norm = [&] {
    double s = 0.0;
    for (double r : residual) s += r * r;
    return std::sqrt(s);
  };
  auto update_residual = [&] {
    residual = b;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] == 0.0) continue;
      for (std::size_t i = 0; i < m; ++i) residual[i] -= a(i, j) * x[j];
    }
  };
  auto solve_passive = [&](std::vector<std::size_t>& cols) {
    Matrix sub(m, cols.size());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < cols.size(); ++c) sub(i, c) = a(i, cols[c]);
    return least_squares(sub, b);
  };

  double bnorm = 0.0;
  for (double v : b) bnorm = std::hypot(bnorm, v);
  const double tol = 1e-13 * std::max(bnorm, std::numeric_limits<double>::min());

  std::vector<double> history;
  std::vector<char> skip(n, 0);
  int iterations = 0;
  while (true) {
    std::vector<double> w(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += a(i, j) * residual[i];
      w[j] = s;
    }
    std::size_t best = n;
    double wmax = tol;
    std::size_t passive_count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (passive[j]) {
        ++passive_count;
        continue;
      }
      if (!skip[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best == n || passive_count >= m) break;
    if (++iterations > max_iterations) {
      throw ConvergenceError("NNLS exceeded " + std::to_string(max_iterations) + " iterations", history);
    }

    passive[best] = 1;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
      if (passive[j]) cols.push_back(j);
    std::vector<double> z = solve_passive(cols);
    const auto pos = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), best) - cols.begin());
    if (z[pos] <= 0.0) {
      // The new column cannot enter with a positive coefficient.
      passive[best] = 0;
      skip[best] = 1;
      continue;
    }
    std::fill(skip.begin(), skip.end(), 0);

    while (true) {
      bool feasible = true;
      for (double v : z) feasible = feasible && v > 0.0;
      if (feasible) break;
      double alpha = std::numeric_limits<double>::infinity();
      std::size_t blocking = cols.size();
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (z[c] <= 0.0) {
          const double xj = x[cols[c]];
          const double ratio = xj / (xj - z[c]);
          if (ratio < alpha) {
            alpha = ratio;
            blocking = c;
          }
        }
      }
      for (std::size_t c = 0; c < cols.size(); ++c) x[cols[c]] += alpha * (z[c] - x[cols[c]]);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c == blocking || x[cols[c]] <= 0.0) {
          x[cols[c]] = 0.0;
          passive[cols[c]] = 0;
        }
      }
      cols.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j]) cols.push_back(j);
      if (cols.empty()) break;
      z = solve_passive(cols);
    }
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) x[cols[c]] = std::max(z[c], 0.0);
    update_residual();
    history.push_back(residual_norm());
  }

  NnlsResult out;
  out.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.x[j] = x[j] / scale[j];
  update_residual();
  out.residual_norm = residual_norm();
  out.iterations = iterations;
  return out;
}

}  // namespace oslab
