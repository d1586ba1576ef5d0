#pragma once

// Seeded random instance generators shared by the test suites and the
// `check` command.

#include <cstddef>
#include <cstdint>
#include <random>

#include "krein/matkit.hpp"

namespace krein {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);

/// Entries with real and imaginary parts uniform in [-scale, scale].
ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);
ComplexMatrix random_unitary(std::size_t n, Rng& rng);
ComplexMatrix random_hermitian(std::size_t n, Rng& rng, double scale = 1.0);
/// U diag(d) U* with d drawn from [lo, hi].
ComplexMatrix random_hermitian_spectrum(std::size_t n, Rng& rng, double lo, double hi);
/// Positive semidefinite of the given rank, nonzero eigenvalues in [0.2, 1.5].
ComplexMatrix random_psd(std::size_t n, std::size_t rank, Rng& rng);
/// Rank-`rank` Hermitian with at least one eigenvalue of each sign
/// (rank >= 2), magnitudes in [0.2, 1.5].
ComplexMatrix random_indefinite(std::size_t n, std::size_t rank, Rng& rng);
/// Invertible dissipative matrix A + i P (A Hermitian, P >= 0); generally
/// non-normal.
ComplexMatrix random_dissipative(std::size_t n, Rng& rng);

}  // namespace krein
