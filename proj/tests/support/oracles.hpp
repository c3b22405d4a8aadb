#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check: a naive triple-loop matmul, a cyclic Jacobi
// eigendecomposition for symmetric matrices, and scalar finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fcprune/matrix.hpp"
#include "fcprune/rng.hpp"

namespace oracles {

using fcprune::Matrix;

// i-j-k order with an explicit inner accumulator (the library uses i-k-j).
inline Matrix naive_matmul(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows(), y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) acc += x(i, k) * y(k, j);
            out(i, j) = acc;
        }
    return out;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(Matrix a, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = ((theta >= 0.0) ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

// Largest singular value via the Jacobi eigenvalues of X^T X.
inline double svd_spectral_norm(const Matrix& x) {
    Matrix gram(x.cols(), x.cols());
    for (std::size_t i = 0; i < x.cols(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.rows(); ++k) s += x(k, i) * x(k, j);
            gram(i, j) = s;
        }
    const std::vector<double> ev = jacobi_eigenvalues(gram);
    return std::sqrt(std::max(ev.front(), 0.0));
}

// Sample covariance of column-samples (matches the pca_project convention).
inline Matrix covariance(const Matrix& x) {
    const std::size_t n = x.rows(), m = x.cols();
    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) mean[i] += x(i, j);
        mean[i] /= static_cast<double>(m);
    }
    Matrix cov(n, n);
    const double denom = (m > 1) ? double(m - 1) : 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < m; ++t) s += (x(i, t) - mean[i]) * (x(j, t) - mean[j]);
            cov(i, j) = s / denom;
        }
    return cov;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Central finite difference of a scalar function of a matrix, entry (i,j).
inline double matrix_central_diff(const std::function<double(const Matrix&)>& f, Matrix at,
                                  std::size_t i, std::size_t j, double h) {
    at(i, j) += h;
    const double up = f(at);
    at(i, j) -= 2.0 * h;
    const double dn = f(at);
    return (up - dn) / (2.0 * h);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, fcprune::Rng& rng,
                            double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = scale * rng.normal();
    return m;
}

inline Matrix random_nonneg_matrix(std::size_t rows, std::size_t cols, fcprune::Rng& rng,
                                   double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = std::abs(scale * rng.normal());
    return m;
}

} // namespace oracles
