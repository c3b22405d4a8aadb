#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fcprune/matrix.hpp"
#include "fcprune/net.hpp"
#include "fcprune/rng.hpp"

namespace fcprune {

struct TrainConfig {
    double lr = 0.01;        // initial learning rate
    double momentum = 0.9;   // classical momentum in [0,1)
    double decay = 0.95;     // per-epoch multiplicative lr factor
    std::size_t batch = 32;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0; // mean per-sample cross-entropy over the epoch
    double train_acc = 0.0;
};

/// Per-layer boolean masks (1 = trainable). Entries masked to 0 keep their
/// weight at exactly zero through training; used for sparsity-preserving
/// retraining after pruning.
struct TrainMask {
    std::vector<Matrix> weight_masks; // same shapes as layer weights
};

/// Mask freezing every currently-zero weight of `net`.
TrainMask mask_from_zeros(const DenseNet& net);

struct TrainResult {
    DenseNet net;
    std::vector<EpochStats> trace;
};

/// Minibatch SGD with classical momentum and per-epoch exponential lr decay
/// on the softmax cross-entropy loss. Deterministic for a fixed seed:
/// identical seed/config/data produce bitwise-identical weights. Aborts with
/// numeric_error if the loss turns non-finite.
TrainResult train(const DenseNet& net, const LabeledSet& set, const TrainConfig& cfg,
                  const std::optional<TrainMask>& mask = std::nullopt);

/// Freshly initialized net: hidden relu layers of the given widths, final
/// linear/softmax layer, scaled-uniform weights (+-sqrt(6/(d_in+d_out))),
/// zero biases when `with_bias`.
DenseNet init_net(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t n_classes, bool with_bias, std::uint64_t seed);

enum class ProbeLoss {
    cross_entropy, // softmax CE against the labels
    quadratic      // 0.5 * |logits - onehot(y)|^2_F, exact for linear nets
};

/// Flattened analytic gradients of the probe loss, layer by layer: weights
/// in row-major order, then bias (when present), for each layer in order.
std::vector<double> analytic_gradients(const DenseNet& net, const LabeledSet& set, ProbeLoss loss);

double probe_loss_value(const DenseNet& net, const LabeledSet& set, ProbeLoss loss);

/// Max relative error between `grads` (flattened, as produced by
/// analytic_gradients) and central finite differences of the probe loss on
/// up to n_probes randomly chosen parameters.
double max_rel_error_vs_fd(const DenseNet& net, const LabeledSet& set,
                           const std::vector<double>& grads, ProbeLoss loss,
                           std::size_t n_probes, double step, Rng rng);

/// Gradient check of the trainer's own backprop: compares analytic gradients
/// against central finite differences (step 1e-5) on <= 200 randomly chosen
/// parameters and returns the max relative error.
double grad_check(const DenseNet& net, const LabeledSet& set,
                  ProbeLoss loss = ProbeLoss::cross_entropy,
                  std::size_t n_probes = 200, double step = 1e-5, Rng rng = Rng(17));

} // namespace fcprune
