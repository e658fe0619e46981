#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "opconv/rng.hpp"
#include "opconv/spectral.hpp"

namespace opconv::random {

// Product of dim^2 Givens rotations with uniform angles on uniformly chosen
// coordinate pairs.
Eigen::MatrixXd orthogonal(std::size_t dim, SplitMix64& rng);

// Q diag(lambda) Q^T with lambda uniform in [lo, hi].
SymMatrix symmetric_with_spectrum(std::size_t dim, double lo, double hi, SplitMix64& rng);
SymMatrix symmetric_with_eigenvalues(const std::vector<double>& eigenvalues, SplitMix64& rng);

// A A^T with A of size dim x rank, entries standard normal.
SymMatrix psd(std::size_t dim, std::size_t rank, SplitMix64& rng);

// Symmetric with independent standard normal entries, scaled to unit operator norm.
SymMatrix unit_norm_symmetric(std::size_t dim, SplitMix64& rng);

Eigen::VectorXd unit_vector(std::size_t dim, SplitMix64& rng);

// First m columns of a random orthogonal matrix.
SubspaceProjection subspace(std::size_t dim, std::size_t m, SplitMix64& rng);

}  // namespace opconv::random
