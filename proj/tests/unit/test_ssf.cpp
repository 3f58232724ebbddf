#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "oslab/derivatives.hpp"
#include "oslab/random.hpp"
#include "oslab/ssf.hpp"

using namespace oslab;

namespace {

const SymmetricOperator kZero = SymmetricOperator::scalar(0.0);
const SymmetricOperator kOne = SymmetricOperator::scalar(1.0);

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

double trace_power(const SymmetricOperator& v, int n) {
  Matrix m = Matrix::identity(v.dim());
  for (int k = 0; k < n; ++k) m = m * v.entries();
  return trace(m);
}

}  // namespace

TEST(SsfCdf, ScalarExamples) {
  EXPECT_NEAR(ssf_cdf(kZero, kOne, 1, 0.5), 0.5, 1e-14);
  EXPECT_NEAR(ssf_cdf(kZero, kOne, 2, 0.0), 0.5, 1e-14);
  EXPECT_NEAR(ssf_cdf(kZero, kOne, 2, 0.25), 0.75 * 0.75 / 2, 1e-14);
  EXPECT_EQ(ssf_cdf(kZero, kOne, 3, 1.5), 0.0);
  const auto [h, v] = random_goe_pair(4, 3);
  EXPECT_NEAR(ssf_cdf(h, v, 2, 100.0), 0.0, 1e-12);
}

TEST(SsfCdf, MatchesMollifiedOracle) {
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const auto [h, v] = random_goe_pair(4, seed + 10);
    RemainderTraceExpansion ex(h, v, 2);
    const Interval hull = ex.hull();
    for (double frac : {0.3, 0.5, 0.7}) {
      const double lambda = hull.lo + frac * hull.width();
      const double got = ssf_cdf(h, v, 2, lambda);
      const double ref = oracle::mollified_cdf_order2(h, v, lambda, 1e-3);
      EXPECT_NEAR(got, ref, 1e-5) << "seed " << seed;
      EXPECT_NEAR(ex.cdf(lambda), got, 1e-12);
    }
  }
}

TEST(SsfCdf, CountingIdentityCommuting) {
  const std::vector<double> a{-1.0, 0.2, 0.9, 2.0};
  const std::vector<double> b{0.5, -0.7, 0.4, 0.3};
  const auto h = SymmetricOperator::diagonal(a);
  const auto v = SymmetricOperator::diagonal(b);
  for (double lambda = -2.0; lambda <= 3.0; lambda += 0.173) {
    double ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      ref += std::max(a[i] + b[i] - lambda, 0.0) - std::max(a[i] - lambda, 0.0);
    EXPECT_NEAR(ssf_cdf(h, v, 1, lambda), ref, 1e-12);
  }
  const auto est = ssf_density(h, v, 1, 4001);
  for (std::size_t i = 0; i < est.grid.size(); i += 97) {
    const double x = est.grid[i];
    double count = 0.0;
    bool near_jump = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      count += (a[k] + b[k] > x) - (a[k] > x);
      near_jump |= std::abs(a[k] + b[k] - x) < 2 * est.step() || std::abs(a[k] - x) < 2 * est.step();
    }
    if (!near_jump) {
      EXPECT_NEAR(est.density[i], count, 1e-8);
    }
  }
}

TEST(SsfDensity, ScalarAndZero) {
  const auto est = ssf_density(kZero, kOne, 2, 801);
  double worst = 0.0;
  // central differences straddle the jump at 0; the bound holds away from it
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double x = est.grid[i];
    if (std::abs(x) <= est.step()) continue;
    worst = std::max(worst, std::abs(est.density[i] - (x >= 0.0 ? std::max(1.0 - x, 0.0) : 0.0)));
  }
  EXPECT_LE(worst, 2 * est.step());
  EXPECT_NEAR(ssf_mass(est), 0.5, 1e-4);

  const auto [h, v] = random_goe_pair(3, 5);
  const auto zero = ssf_density(h, SymmetricOperator::zero(3), 2, 64);
  for (double d : zero.density) EXPECT_EQ(d, 0.0);
}

TEST(SsfDensity, SupportAndMonotoneConsistency) {
  const auto [h, v] = random_psd_pair(4, 21);
  const auto est = ssf_density(h, v, 3, 1201);
  double peak = 0.0;
  for (double d : est.density) peak = std::max(peak, std::abs(d));
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double x = est.grid[i];
    if (x < est.hull.lo - est.step() || x > est.hull.hi + est.step()) {
      EXPECT_LE(std::abs(est.density[i]), 1e-6 * peak);
    }
  }
  EXPECT_EQ(est.verdict, SSFSign::nonneg);
  for (std::size_t i = 1; i < est.cdf.size(); ++i) EXPECT_LE(est.cdf[i], est.cdf[i - 1] + 1e-12 * peak);
}

TEST(SsfMoments, ExamplesAndMass) {
  EXPECT_NEAR(ssf_moments(kZero, kOne, 1, 1)[1], 0.5, 1e-14);
  const auto m2 = ssf_moments(kZero, kOne, 2, 3);
  for (int m = 0; m <= 3; ++m) EXPECT_NEAR(m2[m], 1.0 / (m + 1) - 1.0 / (m + 2), 1e-13);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto [h, v] = random_goe_pair(4, seed);
    for (int n = 1; n <= 4; ++n) {
      const double mass = trace_power(v, n) / factorial(n);
      EXPECT_NEAR(ssf_moments(h, v, n, 0)[0], mass, 1e-12 * std::max(1.0, std::abs(mass)));
    }
  }
}

namespace {

struct LegendreErrors {
  double raw = 0.0;         // reconstruction vs grid density
  double projection = 0.0;  // reconstruction vs same-degree projection of the grid density
};

LegendreErrors legendre_errors(unsigned seed, int degree) {
  const auto [h, v] = random_goe_pair(4, seed);
  const auto est = ssf_density(h, v, 2, 4001);
  const Interval box = est.hull.widened(0.05 * est.hull.width());
  const auto exact = ssf_moments(h, v, 2, degree);
  std::vector<double> grid_moments(exact.size(), 0.0);
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double w = (i == 0 || i + 1 == est.grid.size() ? 0.5 : 1.0) * est.step();
    for (std::size_t m = 0; m < exact.size(); ++m) grid_moments[m] += w * std::pow(est.grid[i], m) * est.density[i];
  }
  const auto recon = oracle::legendre_reconstruction(exact, box.lo, box.hi);
  const auto proj = oracle::legendre_reconstruction(grid_moments, box.lo, box.hi);
  double raw = 0.0, pr = 0.0, dens = 0.0, rec = 0.0;
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double x = est.grid[i];
    raw += std::pow(recon(x) - est.density[i], 2);
    pr += std::pow(recon(x) - proj(x), 2);
    dens += est.density[i] * est.density[i];
    rec += recon(x) * recon(x);
  }
  return {std::sqrt(raw / dens), std::sqrt(pr / rec)};
}

}  // namespace

// The moments pin down the degree-8 Legendre projection of eta_2; the grid
// density must project onto the same polynomial.
TEST(SsfMoments, LegendreReconstructionMatchesProjectedDensity) {
  for (unsigned seed = 61; seed <= 66; ++seed) EXPECT_LE(legendre_errors(seed, 8).projection, 1e-4) << seed;
}

// Literal comparison against the density itself. eta_2 jumps at the hull
// ends (already for d = 1: eta_2 = (1 - x) on [0, 1]), so a degree-8
// polynomial stays 6-33% away in L2 on these instances. Kept visible, not run.
TEST(SsfMoments, DISABLED_LegendreReconstructionWithinFivePercentOfDensity) {
  for (unsigned seed = 61; seed <= 66; ++seed) EXPECT_LE(legendre_errors(seed, 8).raw, 5e-2) << seed;
}

TEST(SsfClosure, GridAndMomentPaths) {
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const auto [h, v] = random_goe_pair(4, seed + 80);
    for (int n = 1; n <= 3; ++n) {
      const double exact = taylor_remainder_direct_trace(exponential(), h, v, n);
      const auto est = ssf_density(h, v, n, 4001);
      EXPECT_NEAR(ssf_grid_integral(exponential(), est), exact, 1e-3 * std::abs(exact));
      const auto mi = ssf_moment_integral(exponential(), h, v, n);
      EXPECT_TRUE(mi.converged);
      EXPECT_NEAR(mi.value, exact, 1e-6 * std::abs(exact));
    }
  }
}

TEST(SsfChebyshev, ZerothMomentIsMass) {
  const auto [h, v] = random_goe_pair(3, 90);
  const Interval box = RemainderTraceExpansion(h, v, 2).hull().widened(0.1);
  const auto cm = ssf_chebyshev_moments(h, v, 2, 4, box);
  EXPECT_NEAR(cm[0], trace_power(v, 2) / 2, 1e-12);
}

TEST(Positivity, VerdictExamples) {
  SSFEstimate est;
  est.order = 2;
  est.grid = {0.0, 1.0, 2.0};
  est.density = {0.0, 1.0, 0.5};
  EXPECT_EQ(positivity_verdict(est, SignClass::indefinite, 2).expected, SignExpectation::nonneg);
  EXPECT_TRUE(positivity_verdict(est, SignClass::indefinite, 2).pass);
  est.order = 3;
  const auto nsd = positivity_verdict(est, SignClass::nsd, 3);
  EXPECT_EQ(nsd.expected, SignExpectation::nonpos);
  EXPECT_FALSE(nsd.pass);
  const auto ind = positivity_verdict(est, SignClass::indefinite, 3);
  EXPECT_FALSE(ind.asserted);
  EXPECT_TRUE(ind.pass);
}

TEST(Positivity, RandomSuite) {
  for (unsigned seed = 1; seed <= 8; ++seed) {
    for (int n = 2; n <= 4; ++n) {
      const auto [h, v] = random_psd_pair(2 + seed % 5, seed * 7 + n);
      const auto est = ssf_density(h, v, n, 400);
      EXPECT_TRUE(positivity_verdict(est, SignClass::psd, n).pass);
      if (n % 2) {
        const auto [h2, v2] = random_nsd_pair(2 + seed % 5, seed * 7 + n);
        const auto est2 = ssf_density(h2, v2, n, 400);
        EXPECT_TRUE(positivity_verdict(est2, SignClass::nsd, n).pass);
      }
    }
  }
}

TEST(SsfCsv, Header) {
  const auto est = ssf_density(kZero, kOne, 1, 16);
  std::ostringstream out;
  write_ssf_csv(out, est, 42);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "lambda,cdf,density,order,seed");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
}
