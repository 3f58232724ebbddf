#include "oslab/random.hpp"

#include <cmath>

#include "oslab/error.hpp"

namespace oslab {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = normal(rng);
  return g;
}

void check_dim(std::size_t dim) {
  if (dim == 0) throw InvalidArgument("instance.dim must be >= 1");
}

}  // namespace

SymmetricOperator random_goe(std::size_t dim, Rng& rng) {
  check_dim(dim);
  const Matrix g = gaussian(dim, dim, rng);
  Matrix s = g + g.transpose();
  s *= 1.0 / (2.0 * std::sqrt(2.0 * static_cast<double>(dim)));
  return SymmetricOperator(s);
}

SymmetricOperator random_psd(std::size_t dim, Rng& rng) {
  check_dim(dim);
  const Matrix a = gaussian(dim, dim, rng);
  Matrix v = a * a.transpose();
  // exact symmetry before the eigen solve
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j) v(j, i) = v(i, j);
  const double norm = SymmetricOperator(v).norm();
  if (norm > 0.0) v *= 1.0 / norm;
  return SymmetricOperator(v);
}

std::pair<SymmetricOperator, SymmetricOperator> random_psd_pair(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  SymmetricOperator h = random_goe(dim, rng);
  SymmetricOperator v = random_psd(dim, rng);
  return {std::move(h), std::move(v)};
}

std::pair<SymmetricOperator, SymmetricOperator> random_nsd_pair(std::size_t dim, std::uint64_t seed) {
  auto [h, v] = random_psd_pair(dim, seed);
  return {std::move(h), -1.0 * v};
}

std::pair<SymmetricOperator, SymmetricOperator> random_goe_pair(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  SymmetricOperator h = random_goe(dim, rng);
  SymmetricOperator v = random_goe(dim, rng);
  return {std::move(h), std::move(v)};
}

std::uint64_t instance_seed(std::uint64_t base, std::uint64_t index) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace oslab
