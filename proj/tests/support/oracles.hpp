#pragma once

// Independent reference computations used only by the tests. None of them
// call the library's divided differences or multilinear contractions.

#include <functional>
#include <vector>

#include "oslab/matrix.hpp"
#include "oslab/spectral.hpp"

namespace oracle {

using oslab::Matrix;
using oslab::SymmetricOperator;

/// exp(A) by scaling and squaring with a 20-term Taylor series.
Matrix expm_taylor(const Matrix& a);

/// Upper bidiagonal node matrix: nodes on the diagonal, ones above it.
Matrix opitz_matrix(const std::vector<double>& nodes);

/// f^[n](nodes) for f = exp, read from the corner of exp(J).
double opitz_exp_dd(const std::vector<double>& nodes);

/// Same for a polynomial with ascending coefficients (Horner on J).
double opitz_poly_dd(const std::vector<double>& coeffs, const std::vector<double>& nodes);

using DividedDifference = std::function<double(const std::vector<double>&)>;

/// sum over index tuples of dd(lambda^0_{i0}, ..., lambda^n_{in})
/// P^0_{i0} V_1 P^1_{i1} ... V_n P^n_{in}, with explicit rank-one projectors.
Matrix projector_sum(const DividedDifference& dd, const std::vector<SymmetricOperator>& bases,
                     const std::vector<Matrix>& perturbations);

/// d^k/dt^k exp(H + tV) at t = s from the (k+1)-block bidiagonal exponential.
Matrix block_exp_derivative(const SymmetricOperator& h, const SymmetricOperator& v, int k, double s);

/// Normalized B-spline (integral one) with the given knots, Cox-de Boor.
double bspline(const std::vector<double>& knots, double x);

/// [x_0..x_k] g for g = (x - lambda)_+^n / n!, k <= n, through the Peano
/// kernel: (1/k!) int B(y) g^(k)(y) dy with piecewise Gauss-Legendre.
double truncated_power_dd_peano(int n, double lambda, const std::vector<double>& nodes);

/// Tr R_2(g) for the Gaussian-mollified g = E[(x - lambda - eps Z)_+^2] / 2,
/// using Tr R_2 = Tr g(H+V) - Tr g(H) - Tr g'(H) V.
double mollified_cdf_order2(const SymmetricOperator& h, const SymmetricOperator& v, double lambda, double eps);

/// Legendre series on [lo, hi] whose first m+1 monomial moments match.
std::function<double(double)> legendre_reconstruction(const std::vector<double>& monomial_moments, double lo,
                                                      double hi);

/// Random symmetric matrix with standard normal entries (own RNG stream).
Matrix random_symmetric(std::size_t dim, unsigned seed);

}  // namespace oracle
