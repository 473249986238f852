#pragma once

#include "erasure/density_matrix.hpp"

#include <cstdint>
#include <random>

namespace erasure {

using Rng = std::mt19937_64;

/// Ginibre-distributed mixed state of the given rank (0 = full rank).
DensityMatrix random_state(const RegisterLayout& layout, Rng& rng, std::size_t rank = 0);
DensityMatrix random_pure_state(const RegisterLayout& layout, Rng& rng);
/// Diagonal state with Dirichlet(1,...,1) probabilities.
DensityMatrix random_diagonal_state(const RegisterLayout& layout, Rng& rng);
/// Haar unitary via QR of a Ginibre matrix.
CMatrix random_unitary(std::size_t dim, Rng& rng);
RVector random_distribution(std::size_t dim, Rng& rng);
CVector random_ket(std::size_t dim, Rng& rng);

}  // namespace erasure
