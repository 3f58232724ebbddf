#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oslab/chebyshev.hpp"
#include "oslab/error.hpp"
#include "oslab/nnls.hpp"
#include "oslab/parallel.hpp"
#include "oslab/quadrature.hpp"
#include "oslab/sign.hpp"

using namespace oslab;

TEST(Quadrature, GaussLegendreExactness) {
  for (int n : {1, 2, 5, 8, 16}) {
    const auto rule = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(integrate([deg](double x) { return std::pow(x, deg); }, -1, 1, rule), exact, 1e-13);
    }
  }
}

TEST(Quadrature, DoublingConvergesAndFails) {
  const auto r = integrate_doubling([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(r.value, std::numbers::e - 1, 1e-13);
  EXPECT_LT(r.last_difference, 1e-12);
  try {
    integrate_doubling([](double x) { return std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, 1e-300, 8, 2);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.trace().size(), 2u);
  }
}

TEST(Nnls, KnownSolutions) {
  const Matrix a = Matrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
  const auto r = nnls(a, {1.0, -1.0, 0.0});
  EXPECT_NEAR(r.x[0], 0.5, 1e-12);
  EXPECT_EQ(r.x[1], 0.0);
  const auto exact = nnls(a, {2.0, 3.0, 5.0});
  EXPECT_NEAR(exact.x[0], 2.0, 1e-12);
  EXPECT_NEAR(exact.x[1], 3.0, 1e-12);
  EXPECT_NEAR(exact.residual_norm, 0.0, 1e-12);
}

TEST(Nnls, KktConditions) {
  Matrix a(12, 6);
  std::vector<double> b(12);
  for (std::size_t i = 0; i < 12; ++i) {
    b[i] = std::sin(1.3 * i) + 0.2;
    for (std::size_t j = 0; j < 6; ++j) a(i, j) = std::cos(0.4 * (i + 1) * (j + 1)) + 0.1 * j;
  }
  const auto r = nnls(a, b);
  std::vector<double> res(12);
  for (std::size_t i = 0; i < 12; ++i) {
    res[i] = b[i];
    for (std::size_t j = 0; j < 6; ++j) res[i] -= a(i, j) * r.x[j];
  }
  for (std::size_t j = 0; j < 6; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < 12; ++i) g += a(i, j) * res[i];
    EXPECT_GE(r.x[j], 0.0);
    if (r.x[j] > 0) {
      EXPECT_NEAR(g, 0.0, 1e-9);
    } else {
      EXPECT_LE(g, 1e-9);
    }
  }
}

TEST(LeastSquares, Line) {
  const Matrix a = Matrix::from_rows({{1, 0}, {1, 1}, {1, 2}, {1, 3}});
  const auto x = least_squares(a, {1.0, 3.0, 5.0, 7.0});
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(x[1], 2.0, 1e-12);
}

TEST(Chebyshev, InterpolationAndCalculus) {
  const Interval box{-1.0, 2.0};
  const auto s = chebyshev_interpolate([](double x) { return std::exp(x); }, box, 30);
  EXPECT_NEAR(s(0.7), std::exp(0.7), 1e-13);
  EXPECT_NEAR(s.derivative()(0.7), std::exp(0.7), 1e-11);
  EXPECT_NEAR(s.antiderivative()(2.0), std::exp(2.0) - std::exp(-1.0), 1e-12);
  const auto ad = chebyshev_adaptive([](double x) { return std::cos(3 * x); }, box);
  EXPECT_TRUE(ad.converged);
  EXPECT_NEAR(ad.series(1.1), std::cos(3.3), 1e-13);
  // T_2 integrated twice on [-1, 1]: u^4/12 - u^2/2 + c1 u + c0 with zero value and slope at -1.
  const auto t2 = chebyshev_basis_antiderivative(2, 2, {-1.0, 1.0});
  auto ref = [](double u) {
    const auto p = [](double v) { return v * v * v * v / 6 - v * v / 2; };
    // p(-1) = -1/3, p'(-1) = -2/3 + 1 = 1/3
    return p(u) - (-1.0 / 3) - (1.0 / 3) * (u + 1);
  };
  EXPECT_NEAR(t2(0.4), ref(0.4), 1e-14);
  const auto f = chebyshev_function(s);
  EXPECT_NEAR(f.derivative(0.3, 2), std::exp(0.3), 1e-9);
}

TEST(Parallel, CoversEveryIndexAndRethrowsLowest) {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error("at " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "at 7");
  }
}

TEST(Sign, ExpectedAndCheck) {
  EXPECT_EQ(expected_sign(2, SignClass::indefinite), SignExpectation::nonneg);
  EXPECT_EQ(expected_sign(3, SignClass::psd), SignExpectation::nonneg);
  EXPECT_EQ(expected_sign(3, SignClass::nsd), SignExpectation::nonpos);
  EXPECT_EQ(expected_sign(1, SignClass::indefinite), SignExpectation::none);
  const std::vector<double> v{1.0, 0.5, -1e-10};
  EXPECT_TRUE(check_sign(v, SignExpectation::nonneg).pass);
  const std::vector<double> w{1.0, -0.1};
  EXPECT_FALSE(check_sign(w, SignExpectation::nonneg).pass);
  EXPECT_TRUE(check_sign(w, SignExpectation::none).pass);
  EXPECT_NEAR(check_sign(w, SignExpectation::nonneg).worst_margin, -0.1, 1e-15);
}
