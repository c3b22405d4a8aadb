#include "fcprune/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace fcprune {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// y = M v
std::vector<double> matvec(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        y[i] = s;
    }
    return y;
}

// y = M^T v
std::vector<double> matvec_t(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += m(i, j) * vi;
    }
    return y;
}

} // namespace

double spectral_norm(const Matrix& x, double tol, std::size_t max_iter, Rng rng) {
    if (x.empty()) throw std::invalid_argument("spectral_norm: empty matrix");
    std::vector<double> v(x.cols());
    for (double& e : v) e = rng.normal();
    double nv = norm2(v);
    if (nv == 0.0) { v[0] = 1.0; nv = 1.0; }
    for (double& e : v) e /= nv;

    double rayleigh = 0.0; // v^T (X^T X) v = |Xv|^2 for unit v
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::vector<double> xv = matvec(x, v);
        const double r = dot(xv, xv);
        if (r == 0.0) return 0.0; // v in the null space; zero matrix in practice
        std::vector<double> w = matvec_t(x, xv); // (X^T X) v
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
        if (it > 0 && std::abs(r - rayleigh) <= tol * r) {
            rayleigh = r;
            break;
        }
        rayleigh = r;
    }
    return std::sqrt(rayleigh);
}

PcaResult pca_project(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows(), m = x.cols();
    if (n == 0 || m == 0) throw std::invalid_argument("pca_project: empty matrix");
    if (k == 0 || k > std::min(n, m)) {
        throw std::invalid_argument("pca_project: k = " + std::to_string(k) +
                                    " out of range for " + shape_str(x));
    }

    // Center samples (columns).
    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += x(i, j);
        mean[i] = s / static_cast<double>(m);
    }
    Matrix xc(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) xc(i, j) = x(i, j) - mean[i];

    // Sample covariance (n x n).
    const double denom = (m > 1) ? static_cast<double>(m - 1) : 1.0;
    Matrix cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < m; ++t) s += xc(i, t) * xc(j, t);
            cov(i, j) = s / denom;
            cov(j, i) = cov(i, j);
        }

    double total_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_var += cov(i, i);

    // Power iteration with deflation; re-orthogonalize against found
    // directions every step to keep the basis orthonormal.
    PcaResult res;
    res.directions = Matrix(n, k);
    res.eigenvalues.resize(k);
    res.total_variance = total_var;
    std::vector<std::vector<double>> basis;
    Rng rng(0xFCA11);
    Matrix defl = cov;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> v(n);
        for (double& e : v) e = rng.normal();
        auto orthogonalize = [&](std::vector<double>& u) {
            for (const auto& b : basis) {
                const double d = dot(u, b);
                for (std::size_t i = 0; i < n; ++i) u[i] -= d * b[i];
            }
        };
        orthogonalize(v);
        double nv = norm2(v);
        if (nv < 1e-300) { v.assign(n, 0.0); v[c % n] = 1.0; orthogonalize(v); nv = norm2(v); }
        for (double& e : v) e /= nv;

        double lambda = 0.0;
        for (std::size_t it = 0; it < 5000; ++it) {
            std::vector<double> w = matvec(defl, v);
            orthogonalize(w);
            const double nw = norm2(w);
            if (nw < 1e-300) { lambda = 0.0; break; } // deflated matrix numerically zero
            for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
            std::vector<double> cv = matvec(defl, v);
            const double r = dot(v, cv);
            if (it > 0 && std::abs(r - lambda) <= 1e-12 * std::max(std::abs(r), 1e-30)) {
                lambda = r;
                break;
            }
            lambda = r;
        }
        res.eigenvalues[c] = std::max(lambda, 0.0);
        for (std::size_t i = 0; i < n; ++i) res.directions(i, c) = v[i];
        basis.push_back(v);
        // Deflate: C <- C - lambda v v^T.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) defl(i, j) -= res.eigenvalues[c] * v[i] * v[j];
    }

    // Reconstruction: mean + P P^T (x - mean).
    Matrix proj = matmul(res.directions, matmul(transpose(res.directions), xc));
    res.reconstructed = Matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) res.reconstructed(i, j) = proj(i, j) + mean[i];
    res.mean = std::move(mean);
    return res;
}

Matrix pca_apply(const PcaResult& pca, const Matrix& x) {
    const std::size_t n = pca.directions.rows();
    if (x.rows() != n) throw std::invalid_argument("pca_apply: feature dimension mismatch");
    Matrix xc(n, x.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) xc(i, j) = x(i, j) - pca.mean[i];
    Matrix proj = matmul(pca.directions, matmul(transpose(pca.directions), xc));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) proj(i, j) += pca.mean[i];
    return proj;
}

} // namespace fcprune
