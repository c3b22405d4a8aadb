#pragma once

#include <cstdint>
#include <vector>

namespace fcprune {

/// Deterministic 64-bit generator (SplitMix64). Counter-based: the state is a
/// single u64 advanced by a fixed odd constant, then mixed. Identical seeds
/// yield identical sequences on every platform; the exact update is spelled
/// out in the README so other implementations can match sequences.
///
/// Passed by value into pure operations; owned and advanced in place by
/// stateful loops (training, minibatch sampling).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two uniforms per pair and
    /// caches the second deviate.
    double normal();

    /// Uniform integer in [0, n). Modulo reduction; the bias is negligible
    /// for the desk-scale n used here (documented in the README).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Fisher-Yates shuffle of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

} // namespace fcprune
