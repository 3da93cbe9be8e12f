#pragma once

#include <cstdint>
#include <random>

#include "qcap/matrix.hpp"

namespace qcap {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser of (master, index); used to give each worker or trial
/// its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Haar-random unit vector (normalised complex Gaussian).
DenseVector random_pure_state(std::size_t dim, Rng& rng);

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
DenseMatrix random_unitary(std::size_t dim, Rng& rng);

/// Unit-trace G G^dagger with G a dim x rank Ginibre matrix.
DenseMatrix random_density(std::size_t dim, Rng& rng, std::size_t rank = 0);

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like scale 1).
DenseMatrix random_hermitian(std::size_t dim, Rng& rng);

}  // namespace qcap
