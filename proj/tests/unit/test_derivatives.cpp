#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "oslab/derivatives.hpp"
#include "oslab/error.hpp"
#include "oslab/moi.hpp"
#include "oslab/random.hpp"

using namespace oslab;

namespace {

const SymmetricOperator kH = SymmetricOperator::diagonal(std::vector<double>{1.0, 2.0});
const SymmetricOperator kSwap(Matrix::from_rows({{0, 1}, {1, 0}}));

}  // namespace

TEST(OperatorDerivative, QuadraticExamples) {
  const Matrix d1 = operator_derivative(monomial(2), kH, kSwap, 1, 0.0);
  EXPECT_NEAR(d1(0, 1), 3.0, 1e-14);
  EXPECT_NEAR(d1(0, 0), 0.0, 1e-14);
  const SymmetricOperator h(oracle::random_symmetric(4, 1));
  const SymmetricOperator v(oracle::random_symmetric(4, 2));
  const Matrix d2 = operator_derivative(monomial(2), h, v, 2, 0.37);
  const Matrix ref = 2.0 * (v.entries() * v.entries());
  EXPECT_LE(max_abs_diff(d2, ref), 1e-12 * ref.max_abs());
}

TEST(OperatorDerivative, ExpMatchesBlockExponentialOracle) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto [h, v] = random_goe_pair(5, seed);
    for (int k = 1; k <= 4; ++k) {
      const Matrix got = operator_derivative(exponential(), h, v, k, 0.3);
      const Matrix ref = oracle::block_exp_derivative(h, v, k, 0.3);
      EXPECT_LE(max_abs_diff(got, ref), 1e-10 * ref.max_abs()) << "k=" << k;
    }
  }
}

TEST(OperatorDerivative, ExpMatchesFiniteDifferences) {
  const auto [h, v] = random_goe_pair(5, 42);
  const Matrix got = operator_derivative(exponential(), h, v, 3, 0.3);
  const Matrix fd = finite_difference_oracle(exponential(), h, v, 3, 0.3, default_fd_step(3, v));
  EXPECT_LE(max_abs_diff(got, fd), 1e-6 * fd.max_abs());
}

TEST(OperatorDerivative, ConsistentWithLowerOrder) {
  const auto [h, v] = random_psd_pair(4, 9);
  const auto f = bump(0.0, 4.0);
  const double step = 1e-3;
  for (int k = 1; k <= 3; ++k) {
    const Matrix up = operator_derivative(f, h, v, k - 1, 0.2 + step);
    const Matrix dn = operator_derivative(f, h, v, k - 1, 0.2 - step);
    Matrix fd = up - dn;
    fd *= 1.0 / (2 * step);
    const Matrix got = operator_derivative(f, h, v, k, 0.2);
    EXPECT_LE(max_abs_diff(got, fd), 1e-5 * got.max_abs()) << "k=" << k;
  }
}

TEST(FiniteDifference, ExactOnLowDegreeAndConvergence) {
  const auto [h, v] = random_goe_pair(3, 5);
  const Matrix lin = finite_difference_oracle(polynomial({0.5, 2.0}), h, v, 1, 0.0, 0.1);
  Matrix ref1 = v.entries();
  ref1 *= 2.0;
  EXPECT_LE(max_abs_diff(lin, ref1), 1e-12);
  const Matrix quad = finite_difference_oracle(monomial(2), h, v, 2, 0.0, 0.1);
  EXPECT_LE(max_abs_diff(quad, 2.0 * (v.entries() * v.entries())), 1e-10);
  // plain stencil: halving h cuts the error by at least 4x
  const Matrix exact = operator_derivative(exponential(), h, v, 2, 0.0);
  const double e1 = max_abs_diff(finite_difference_oracle(exponential(), h, v, 2, 0.0, 0.2, false), exact);
  const double e2 = max_abs_diff(finite_difference_oracle(exponential(), h, v, 2, 0.0, 0.1, false), exact);
  EXPECT_GE(e1 / e2, 4.0);
  const auto w = central_difference_weights(2);
  double s = 0.0;
  for (double x : w) s += x;
  EXPECT_NEAR(s, 0.0, 1e-14);
}

TEST(DerivativeTrace, Examples) {
  const SymmetricOperator h(oracle::random_symmetric(4, 3));
  const SymmetricOperator v(oracle::random_symmetric(4, 4));
  EXPECT_NEAR(derivative_trace(monomial(2), h, v, 1, 0.0), 2.0 * trace(h.entries() * v.entries()), 1e-12);
  const auto inv = shifted_power(-1.0, 0.0);
  EXPECT_NEAR(derivative_trace(inv, SymmetricOperator::scalar(2.0), SymmetricOperator::scalar(1.0), 1, 0.0), -0.25,
              1e-15);
}

TEST(DerivativeTrace, OtteSignsOnRandomSuite) {
  const std::vector<double> s_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  for (unsigned seed = 1; seed <= 10; ++seed) {
    for (int n = 1; n <= 4; ++n) {
      auto [h, v] = random_psd_pair(2 + seed % 5, seed);
      const auto rep = derivative_trace_sign_check(exponential(), h, v, n, s_grid);
      EXPECT_TRUE(rep.hypothesis_holds);
      EXPECT_TRUE(rep.check.pass) << "n=" << n << " seed=" << seed << " margin=" << rep.check.worst_margin;
      auto [h2, v2] = random_nsd_pair(2 + seed % 5, seed);
      const auto neg = derivative_trace_sign_check(exponential(), h2, v2, n, s_grid);
      EXPECT_EQ(neg.check.expected, n % 2 ? SignExpectation::nonpos : SignExpectation::nonneg);
      EXPECT_TRUE(neg.check.pass);
    }
  }
}

TEST(Remainder, QuadraticExamples) {
  const SymmetricOperator h(oracle::random_symmetric(3, 6));
  const SymmetricOperator v(oracle::random_symmetric(3, 7));
  const Matrix v2 = v.entries() * v.entries();
  EXPECT_LE(max_abs_diff(taylor_remainder_direct(monomial(2), h, v, 2), v2), 1e-12 * v2.max_abs());
  const Matrix r1 = h.entries() * v.entries() + v.entries() * h.entries() + v2;
  EXPECT_LE(max_abs_diff(taylor_remainder_direct(monomial(2), h, v, 1), r1), 1e-12 * r1.max_abs());
  EXPECT_LE(max_abs_diff(taylor_remainder_via_perturbation(monomial(2), h, v, 2), v2), 1e-12 * v2.max_abs());
  EXPECT_LE(taylor_remainder_direct(polynomial({1.0, 2.0, 3.0}), h, v, 3).max_abs(), 1e-12);
  EXPECT_THROW(taylor_remainder_via_perturbation(exponential(), h, v, 1), InvalidArgument);
  EXPECT_LE(max_abs_diff(first_order_remainder(monomial(2), h, v), taylor_remainder_direct(monomial(2), h, v, 1)),
            1e-12);
}

TEST(Remainder, CommutingMatchesScalar) {
  const auto h = SymmetricOperator::diagonal(std::vector<double>{-0.5, 0.3, 1.1});
  const auto v = SymmetricOperator::diagonal(std::vector<double>{0.7, -0.2, 0.4});
  const Matrix r = taylor_remainder_via_perturbation(exponential(), h, v, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = h.entries()(i, i);
    const double b = v.entries()(i, i);
    const double scalar = std::exp(a + b) - std::exp(a) * (1 + b + b * b / 2);
    EXPECT_NEAR(r(i, i), scalar, 1e-13);
  }
}

TEST(Remainder, ThreeFormsAgree) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto [h, v] = random_goe_pair(5, seed + 300);
    for (int n = 1; n <= 4; ++n) {
      const double direct = taylor_remainder_direct_trace(exponential(), h, v, n);
      const double pert = n >= 2 ? taylor_remainder_via_perturbation_trace(exponential(), h, v, n)
                                 : trace(first_order_remainder(exponential(), h, v));
      const double integral = remainder_trace_integral(exponential(), h, v, n, 1e-8).value;
      EXPECT_NEAR(direct, pert, 1e-9 * std::max(1.0, std::abs(direct)));
      EXPECT_NEAR(direct, integral, 1e-8 * std::max(1.0, std::abs(direct)));
      const Matrix full = taylor_remainder_direct(exponential(), h, v, n);
      EXPECT_NEAR(trace(full), direct, 1e-10 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST(Remainder, IntegralExamples) {
  const SymmetricOperator h = SymmetricOperator::diagonal(std::vector<double>{1.0, 1.0});
  EXPECT_NEAR(remainder_trace_integral(monomial(2), h, kSwap, 1, 1e-12).value, 2.0, 1e-12);
  const auto [hh, vv] = random_goe_pair(4, 77);
  for (int n = 1; n <= 4; ++n) {
    const Matrix vn = [&] {
      Matrix m = Matrix::identity(4);
      for (int k = 0; k < n; ++k) m = m * vv.entries();
      return m;
    }();
    EXPECT_NEAR(remainder_trace_integral(monomial(n), hh, vv, n, 1e-12).value, trace(vn), 1e-10);
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    EXPECT_NEAR(taylor_remainder_direct_trace(monomial(n, 1.0 / fact), hh, vv, n), trace(vn) / fact, 1e-10);
  }
}

TEST(Remainder, QuadratureNonConvergenceCarriesValues) {
  const auto [h, v] = random_goe_pair(3, 4);
  try {
    remainder_trace_integral(exponential(30.0), h, 3.0 * v, 2, 1e-300);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.trace().size(), 2u);
  }
}

TEST(PowerSigns, Examples) {
  const auto one = SymmetricOperator::scalar(1.0);
  const auto r = power_sign_report(SymmetricOperator::scalar(2.0), one, -1.0, 0.0, 1, {0.0});
  EXPECT_NEAR(r.values[0], -0.25, 1e-15);
  EXPECT_TRUE(r.case_iii);
  EXPECT_TRUE(r.pass);
  Rng rng(3);
  const auto hp = random_psd(3, rng);
  const auto vp = random_psd(3, rng);
  const auto q = power_sign_report(hp, vp, 2.0, 0.0, 1, {0.0, 0.5, 1.0});
  EXPECT_TRUE(q.pass);
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    const double s = q.s_grid[i];
    EXPECT_NEAR(q.values[i], 2.0 * trace((hp.entries() + s * vp.entries()) * vp.entries()), 1e-12);
  }
}

TEST(PowerSigns, RandomFractionalAndErrors) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto [h, v] = random_psd_pair(4, seed);
    const double lambda = h.min_eigenvalue() - 1.0;
    const auto rep = power_sign_report(h, v, 1.5, lambda, 2, {0.0, 0.25, 0.5, 0.75, 1.0});
    EXPECT_TRUE(rep.case_ii);
    EXPECT_TRUE(rep.pass);
    EXPECT_THROW(power_sign_report(h, v, 1.5, h.min_eigenvalue() + 0.1, 2, {0.0}), InvalidArgument);
    EXPECT_THROW(power_sign_report(h, -1.0 * v, 2.0, lambda, 1, {0.0}), InvalidArgument);
  }
}
