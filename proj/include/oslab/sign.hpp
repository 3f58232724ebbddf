#pragma once

#include <span>
#include <string>

#include "oslab/spectral.hpp"

namespace oslab {

enum class SignExpectation { nonneg, nonpos, none };

const char* to_string(SignExpectation e) noexcept;

/// Positivity pattern for order-n quantities: even n gives nonneg; odd n
/// follows the sign of V; odd n with indefinite V makes no claim.
SignExpectation expected_sign(int n, SignClass v_sign) noexcept;

struct SignCheck {
  SignExpectation expected = SignExpectation::none;
  /// Always true when nothing is expected.
  bool pass = true;
  /// Minimum of the sign-adjusted values divided by max |value| (0 if all vanish).
  double worst_margin = 0.0;
  double max_abs = 0.0;
  double tolerance = 0.0;
};

/// Tolerance is max(rel_tol * max|v|, abs_floor). For `none` the margin is
/// reported against the nonneg orientation.
SignCheck check_sign(std::span<const double> values, SignExpectation expected, double rel_tol = 1e-8,
                     double abs_floor = 1e-12);

}  // namespace oslab
