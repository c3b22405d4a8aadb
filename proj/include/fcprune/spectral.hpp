#pragma once

#include <vector>

#include "fcprune/matrix.hpp"
#include "fcprune/rng.hpp"

namespace fcprune {

inline constexpr double kPowerIterTol = 1e-9;
inline constexpr std::size_t kPowerIterMax = 1000;

/// Largest singular value, estimated by power iteration on X^T X from a
/// seeded random start vector. Stops when the relative change of the
/// Rayleigh quotient drops below tol or after max_iter steps. The estimate
/// never exceeds the true value by more than the stopping tolerance; a zero
/// matrix returns 0. Rng is taken by value: the call is pure.
double spectral_norm(const Matrix& x, double tol = kPowerIterTol,
                     std::size_t max_iter = kPowerIterMax, Rng rng = Rng(0));

struct PcaResult {
    Matrix directions;          // n x k, orthonormal columns, leading first
    Matrix reconstructed;       // n x m, rank-k reconstruction in ambient space
    std::vector<double> eigenvalues; // top-k covariance eigenvalues, non-increasing
    std::vector<double> mean;   // per-feature mean of the fitted data
    double total_variance = 0;  // trace of the sample covariance
};

/// Top-k principal directions of the column-sample matrix X (samples are
/// columns) via power iteration with deflation on the sample covariance,
/// plus the input reconstructed in the original space after rank-k
/// projection. Directions are orthonormal to 1e-8.
PcaResult pca_project(const Matrix& x, std::size_t k);

/// Rank-k reconstruction of new columns under an already-fitted projection:
/// mean + P P^T (x - mean).
Matrix pca_apply(const PcaResult& pca, const Matrix& x);

} // namespace fcprune
