#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "oslab/matrix.hpp"

namespace oslab {

/// Entrywise symmetry tolerance relative to max(1, max|A_ij|).
inline constexpr double kSymmetryTolerance = 1e-12;

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const noexcept { return lo <= other.lo && other.hi <= hi; }
  Interval widened(double margin) const noexcept { return {lo - margin, hi + margin}; }
};

/// Ascending eigenvalues with the matching orthonormal eigenvectors stored as
/// the columns of `vectors`.
struct Eigensystem {
  std::vector<double> values;
  Matrix vectors;
};

/// Cyclic Jacobi with threshold sweeps. The result is deterministic for a
/// fixed input: eigenvalues ascend and the first component of magnitude above
/// 1e-12 in every eigenvector is positive.
///
/// Throws InvalidArgument (reporting the largest asymmetry) when `a` is not
/// symmetric within kSymmetryTolerance.
Eigensystem eigendecompose(const Matrix& a);

namespace detail {
struct SpectralCache;
}

/// Dense real symmetric matrix with a lazily computed, shared spectral
/// decomposition. Values are immutable; copies share the cache, and the cache
/// is filled at most once even under concurrent access.
class SymmetricOperator {
 public:
  SymmetricOperator();
  /// Validates symmetry and stores the exactly symmetrized entries.
  explicit SymmetricOperator(const Matrix& entries);

  static SymmetricOperator diagonal(std::span<const double> values);
  static SymmetricOperator scalar(double value);
  static SymmetricOperator zero(std::size_t dim);

  std::size_t dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  const Eigensystem& spectrum() const;
  const std::vector<double>& eigenvalues() const { return spectrum().values; }
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  /// Operator norm, max |lambda_i|.
  double norm() const;

  bool operator==(const SymmetricOperator& other) const { return entries_ == other.entries_; }

 private:
  Matrix entries_;
  std::shared_ptr<detail::SpectralCache> cache_;
};

SymmetricOperator operator+(const SymmetricOperator& a, const SymmetricOperator& b);
SymmetricOperator operator-(const SymmetricOperator& a, const SymmetricOperator& b);
SymmetricOperator operator*(double scalar, const SymmetricOperator& a);

/// H + t V.
SymmetricOperator shifted(const SymmetricOperator& h, const SymmetricOperator& v, double t);

/// Q f(Lambda) Q^T for a plain scalar callable. Domain checks live in the
/// SmoothFunction overload (functions.hpp).
SymmetricOperator apply_function(const SymmetricOperator& h, const std::function<double(double)>& f);

/// Schatten p-norm from eigenvalues; p = infinity gives max |lambda_i|.
/// Throws InvalidArgument for p < 1.
double schatten_norm(const SymmetricOperator& a, double p);

/// Schatten p-norm of a general square matrix from its singular values.
double schatten_norm(const Matrix& a, double p);

double trace(const SymmetricOperator& a);

enum class SignClass { psd, nsd, indefinite };

/// PSD / NSD classification with eigenvalue tolerance tol * max(1, |A|).
SignClass sign_class(const SymmetricOperator& a, double tol = 1e-12);

struct SpectralHull {
  /// Hull of sampled spectra of H + tV, widened by 1e-6 of its width.
  Interval sampled;
  /// Weyl-bound superset: lambda_min(H) + min_t min(t lambda_min(V), t lambda_max(V)),
  /// and symmetrically for the upper end.
  Interval weyl;
};

/// Convex hull of the spectra of H + tV over `samples` equally spaced t in
/// [t_lo, t_hi] (endpoints included). The extreme eigenvalues are concave /
/// convex in t, so the endpoint samples already attain the exact hull.
SpectralHull spectral_hull(const SymmetricOperator& h, const SymmetricOperator& v, double t_lo,
                           double t_hi, int samples);

}  // namespace oslab
