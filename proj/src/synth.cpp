#include "fcprune/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "fcprune/rng.hpp"

namespace fcprune {

void SynthSpec::validate() const {
    if (n_ambient == 0 || k_intrinsic == 0 || n_classes < 2 || m == 0)
        throw std::invalid_argument("SynthSpec: dimensions and counts must be positive (>=2 classes)");
    if (k_intrinsic > n_ambient)
        throw std::invalid_argument("SynthSpec: k_intrinsic exceeds n_ambient");
    if (m < n_classes) throw std::invalid_argument("SynthSpec: need at least one sample per class");
    if (noise < 0.0) throw std::invalid_argument("SynthSpec: noise must be nonnegative");
}

namespace {

// Orthonormal n x k embedding: Gaussian columns, Gram-Schmidt.
Matrix random_orthonormal(std::size_t n, std::size_t k, Rng& rng) {
    Matrix e(n, k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> v(n);
        for (double& x : v) x = rng.normal();
        for (std::size_t prev = 0; prev < c; ++prev) {
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i) d += v[i] * e(i, prev);
            for (std::size_t i = 0; i < n; ++i) v[i] -= d * e(i, prev);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-12) { v.assign(n, 0.0); v[c % n] = 1.0; norm = 1.0; }
        for (std::size_t i = 0; i < n; ++i) e(i, c) = v[i] / norm;
    }
    return e;
}

} // namespace

LabeledSet make_synthetic(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_ambient, k = spec.k_intrinsic;
    Rng rng(spec.seed);

    // Class means: unit directions in latent space, radius 3.
    Matrix means(k, spec.n_classes);
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        std::vector<double> d(k);
        double norm = 0.0;
        for (double& x : d) { x = rng.normal(); norm += x * x; }
        norm = std::sqrt(norm);
        if (norm < 1e-12) { d.assign(k, 0.0); d[c % k] = 1.0; norm = 1.0; }
        for (std::size_t i = 0; i < k; ++i) means(i, c) = 3.0 * d[i] / norm;
    }

    // Fixed latent mixing for the smooth nonlinearity z + tanh(Sz).
    Matrix mixing(k, k);
    for (double& v : mixing.values()) v = rng.normal() / std::sqrt(static_cast<double>(k));

    Matrix embed = random_orthonormal(n, k, rng);

    LabeledSet set;
    set.X = Matrix(n, spec.m);
    set.y.resize(spec.m);
    std::vector<double> z(k), phi(k);
    for (std::size_t s = 0; s < spec.m; ++s) {
        const std::size_t c = s % spec.n_classes;
        set.y[s] = static_cast<int>(c);
        for (std::size_t i = 0; i < k; ++i) z[i] = means(i, c) + rng.normal();
        for (std::size_t i = 0; i < k; ++i) {
            double sz = 0.0;
            for (std::size_t j = 0; j < k; ++j) sz += mixing(i, j) * z[j];
            phi[i] = z[i] + std::tanh(sz);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double x = 0.0;
            for (std::size_t j = 0; j < k; ++j) x += embed(i, j) * phi[j];
            set.X(i, s) = x;
        }
    }
    if (spec.noise > 0.0) {
        for (std::size_t s = 0; s < spec.m; ++s)
            for (std::size_t i = 0; i < n; ++i) set.X(i, s) += spec.noise * rng.normal();
    }
    return set;
}

} // namespace fcprune
