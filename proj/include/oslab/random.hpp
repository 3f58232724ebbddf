#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "oslab/spectral.hpp"

namespace oslab {

/// Seeded engine; every generator below draws from std::normal_distribution
/// on a fresh mt19937_64 so identical seeds give bit-identical matrices.
using Rng = std::mt19937_64;

/// (G + G^T) / (2 sqrt(2 d)) with G standard Gaussian.
SymmetricOperator random_goe(std::size_t dim, Rng& rng);

/// Gaussian A, V = A A^T / ||A A^T||_inf (unit spectral norm, PSD).
SymmetricOperator random_psd(std::size_t dim, Rng& rng);

/// H from random_goe, then V from random_psd, both from one seed.
std::pair<SymmetricOperator, SymmetricOperator> random_psd_pair(std::size_t dim, std::uint64_t seed);
/// Same as random_psd_pair with V negated.
std::pair<SymmetricOperator, SymmetricOperator> random_nsd_pair(std::size_t dim, std::uint64_t seed);
/// Two independent GOE draws.
std::pair<SymmetricOperator, SymmetricOperator> random_goe_pair(std::size_t dim, std::uint64_t seed);

/// Derives a per-instance seed; splitmix64 of base + index.
std::uint64_t instance_seed(std::uint64_t base, std::uint64_t index) noexcept;

}  // namespace oslab
