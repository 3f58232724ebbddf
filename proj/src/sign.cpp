#include "oslab/sign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oslab {

const char* to_string(SignExpectation e) noexcept {
  switch (e) {
    case SignExpectation::nonneg:
      return "nonneg";
    case SignExpectation::nonpos:
      return "nonpos";
    case SignExpectation::none:
      break;
  }
  return "none";
}

SignExpectation expected_sign(int n, SignClass v_sign) noexcept {
  if (n % 2 == 0) return SignExpectation::nonneg;
  switch (v_sign) {
    case SignClass::psd:
      return SignExpectation::nonneg;
    case SignClass::nsd:
      return SignExpectation::nonpos;
    case SignClass::indefinite:
      break;
  }
  return SignExpectation::none;
}

SignCheck check_sign(std::span<const double> values, SignExpectation expected, double rel_tol, double abs_floor) {
  SignCheck c;
  c.expected = expected;
  for (double v : values) c.max_abs = std::max(c.max_abs, std::abs(v));
  c.tolerance = std::max(rel_tol * c.max_abs, abs_floor);
  const double orient = expected == SignExpectation::nonpos ? -1.0 : 1.0;
  double worst = std::numeric_limits<double>::infinity();
  for (double v : values) worst = std::min(worst, orient * v);
  if (values.empty()) worst = 0.0;
  c.worst_margin = c.max_abs > 0.0 ? worst / c.max_abs : 0.0;
  c.pass = expected == SignExpectation::none || worst >= -c.tolerance;
  return c;
}

}  // namespace oslab
