#pragma once

#include <cstdint>

#include "fcprune/net.hpp"

namespace fcprune {

/// Synthetic classification data of controllable intrinsic dimension.
///
/// Latent class-conditional Gaussians in k_intrinsic dims are passed through
/// a fixed smooth nonlinearity (z + tanh(Sz) with a seeded mixing matrix S)
/// and a seeded orthonormal embedding into n_ambient dims, then isotropic
/// noise of scale `noise` is added. The noiseless output lies in a
/// k_intrinsic-dimensional subspace, so its PCA rank matches k_intrinsic.
struct SynthSpec {
    std::size_t n_ambient = 0;
    std::size_t k_intrinsic = 0;
    std::size_t n_classes = 0;
    std::size_t m = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

LabeledSet make_synthetic(const SynthSpec& spec);

} // namespace fcprune
