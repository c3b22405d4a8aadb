#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fcprune/spectral.hpp"
#include "support/oracles.hpp"

using namespace fcprune;

TEST_CASE("spectral norm of identity and diagonal matrices") {
    CHECK(spectral_norm(Matrix::identity(5)) == doctest::Approx(1.0).epsilon(1e-10));
    const Matrix d{{3.0, 0.0}, {0.0, 1.0}};
    CHECK(spectral_norm(d) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(spectral_norm(Matrix(4, 3)) == 0.0);
}

TEST_CASE("spectral norm matches the dense eigendecomposition oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = oracles::random_matrix(8, 6, rng);
        const double want = oracles::svd_spectral_norm(x);
        const double got = spectral_norm(x, 1e-12, 20000, Rng(trial));
        CHECK(std::abs(got - want) / want <= 1e-8);
    }
}

TEST_CASE("spectral norm is absolutely homogeneous") {
    Rng rng(33);
    const Matrix x = oracles::random_matrix(5, 4, rng);
    const double base = spectral_norm(x, 1e-12, 20000);
    for (double c : {-2.5, 0.25, 7.0}) {
        const double scaled = spectral_norm(c * x, 1e-12, 20000);
        CHECK(std::abs(scaled - std::abs(c) * base) / (std::abs(c) * base) <= 1e-8);
    }
}

TEST_CASE("pca reconstructs data that lies on a line through the origin") {
    Rng rng(5);
    Matrix x(4, 30);
    std::vector<double> dir = {0.5, -1.0, 2.0, 0.25};
    for (std::size_t j = 0; j < 30; ++j) {
        const double t = rng.normal();
        for (std::size_t i = 0; i < 4; ++i) x(i, j) = t * dir[i];
    }
    const PcaResult res = pca_project(x, 1);
    CHECK(max_abs(res.reconstructed - x) <= 1e-8);
}

TEST_CASE("full-rank pca reproduces the input") {
    Rng rng(6);
    const Matrix x = oracles::random_matrix(5, 40, rng);
    const PcaResult res = pca_project(x, 5);
    CHECK(max_abs(res.reconstructed - x) <= 1e-8);
}

TEST_CASE("pca explained variance matches the jacobi oracle") {
    Rng rng(8);
    Matrix x = oracles::random_matrix(6, 50, rng);
    // Stretch two directions so the spectrum is interesting.
    for (std::size_t j = 0; j < 50; ++j) {
        x(0, j) *= 4.0;
        x(1, j) *= 2.0;
    }
    const auto oracle_ev = oracles::jacobi_eigenvalues(oracles::covariance(x));
    const double oracle_total = [&] {
        double s = 0.0;
        for (double v : oracle_ev) s += v;
        return s;
    }();

    const PcaResult res = pca_project(x, 3);
    double got_sum = 0.0, want_sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        got_sum += res.eigenvalues[c];
        want_sum += oracle_ev[c];
        CHECK(std::abs(res.eigenvalues[c] - oracle_ev[c]) /
                  std::max(oracle_ev[c], 1e-12) <= 1e-6);
    }
    CHECK(std::abs(got_sum / res.total_variance - want_sum / oracle_total) <= 1e-6);
}

TEST_CASE("pca directions are orthonormal and eigenvalues non-increasing") {
    Rng rng(13);
    const Matrix x = oracles::random_matrix(7, 60, rng);
    const PcaResult res = pca_project(x, 4);
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 7; ++i) dot += res.directions(i, a) * res.directions(i, b);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-8);
        }
    }
    for (std::size_t c = 1; c < 4; ++c) CHECK(res.eigenvalues[c] <= res.eigenvalues[c - 1] + 1e-12);
}

TEST_CASE("pca rejects out-of-range k") {
    const Matrix x(4, 10, 1.0);
    CHECK_THROWS_AS(pca_project(x, 0), std::invalid_argument);
    CHECK_THROWS_AS(pca_project(x, 5), std::invalid_argument);
}

TEST_CASE("pca_apply projects new columns with the fitted basis") {
    Rng rng(17);
    const Matrix x = oracles::random_matrix(5, 40, rng);
    const PcaResult res = pca_project(x, 2);
    CHECK(max_abs(pca_apply(res, x) - res.reconstructed) <= 1e-10);
}
