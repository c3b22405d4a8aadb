#include <doctest.h>

#include <cmath>

#include "fcprune/trainer.hpp"
#include "support/oracles.hpp"

using namespace fcprune;

namespace {

// Two linearly separable 2-D blobs, round-robin labels.
LabeledSet blobs(std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    LabeledSet set;
    set.X = Matrix(2, m);
    set.y.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const int c = static_cast<int>(j % 2);
        set.y[j] = c;
        const double cx = c == 0 ? -2.0 : 2.0;
        set.X(0, j) = cx + 0.4 * rng.normal();
        set.X(1, j) = (c == 0 ? 1.0 : -1.0) + 0.4 * rng.normal();
    }
    return set;
}

} // namespace

TEST_CASE("separable blobs train to >= 0.99 accuracy in 30 epochs") {
    const LabeledSet set = blobs(200, 1);
    const DenseNet net0 = init_net(2, {8}, 2, true, 1);
    TrainConfig cfg;
    cfg.seed = 1;
    const TrainResult res = train(net0, set, cfg);
    CHECK(accuracy(res.net, set) >= 0.99);
    REQUIRE(res.trace.size() == 30);
    CHECK(res.trace.back().mean_loss < res.trace.front().mean_loss);
    for (const EpochStats& st : res.trace) CHECK(std::isfinite(st.mean_loss));
    // lr follows the exponential decay schedule.
    CHECK(res.trace[1].lr == doctest::Approx(cfg.lr * cfg.decay).epsilon(1e-12));
}

TEST_CASE("zero epochs returns the initial net unchanged") {
    const LabeledSet set = blobs(20, 2);
    const DenseNet net0 = init_net(2, {4}, 2, true, 3);
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainResult res = train(net0, set, cfg);
    CHECK(res.trace.empty());
    for (std::size_t i = 0; i < net0.num_layers(); ++i)
        CHECK(res.net.layer(i).weights == net0.layer(i).weights);
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
    const LabeledSet set = blobs(60, 3);
    const DenseNet net0 = init_net(2, {6}, 2, true, 4);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 77;
    const TrainResult a = train(net0, set, cfg);
    const TrainResult b = train(net0, set, cfg);
    for (std::size_t i = 0; i < a.net.num_layers(); ++i) {
        CHECK(a.net.layer(i).weights == b.net.layer(i).weights);
        CHECK(a.net.layer(i).bias == b.net.layer(i).bias);
    }
}

TEST_CASE("grad_check: backprop matches finite differences") {
    const LabeledSet set = blobs(24, 5);
    const DenseNet net = init_net(2, {7, 5}, 2, true, 6);
    CHECK(grad_check(net, set) <= 1e-4);
}

TEST_CASE("grad_check: quadratic probe loss on a linear net is near-exact") {
    Rng rng(71);
    LabeledSet set;
    set.X = oracles::random_matrix(3, 10, rng);
    set.y = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    Layer l{oracles::random_matrix(3, 3, rng), std::vector<double>(3, 0.1), Activation::linear};
    const DenseNet net({l});
    CHECK(grad_check(net, set, ProbeLoss::quadratic) <= 1e-8);
}

TEST_CASE("grad_check flags a corrupted gradient (negative control)") {
    const LabeledSet set = blobs(24, 8);
    const DenseNet net = init_net(2, {5}, 2, true, 9);
    std::vector<double> grads = analytic_gradients(net, set, ProbeLoss::cross_entropy);
    for (double& g : grads) g += 1.0; // break every coordinate
    CHECK(max_rel_error_vs_fd(net, set, grads, ProbeLoss::cross_entropy, 200, 1e-5, Rng(17)) > 1e-2);
}

TEST_CASE("masked retraining keeps pruned weights at exactly zero") {
    const LabeledSet set = blobs(80, 10);
    const DenseNet net0 = init_net(2, {8}, 2, true, 11);
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 12;
    DenseNet trained = train(net0, set, cfg).net;

    // Zero half the first layer by hand, then retrain under the zero mask.
    std::vector<Layer> layers = trained.layers();
    for (std::size_t i = 0; i < layers[0].weights.size(); i += 2) layers[0].weights.values()[i] = 0.0;
    const DenseNet pruned(layers);
    const TrainMask mask = mask_from_zeros(pruned);
    const DenseNet retrained = train(pruned, set, cfg, mask).net;

    std::size_t zeros = 0;
    for (std::size_t i = 0; i < retrained.layer(0).weights.size(); i += 2) {
        CHECK(retrained.layer(0).weights.values()[i] == 0.0);
        ++zeros;
    }
    CHECK(zeros > 0);
    // Unmasked entries did move.
    bool moved = false;
    for (std::size_t i = 1; i < retrained.layer(0).weights.size(); i += 2)
        if (retrained.layer(0).weights.values()[i] != pruned.layer(0).weights.values()[i]) moved = true;
    CHECK(moved);
}

TEST_CASE("train validates its inputs") {
    const LabeledSet set = blobs(10, 13);
    const DenseNet net = init_net(2, {4}, 2, true, 14);
    TrainConfig bad;
    bad.lr = 0.0;
    CHECK_THROWS_AS(train(net, set, bad), std::invalid_argument);
    TrainConfig cfg;
    LabeledSet mislabeled = set;
    mislabeled.y[0] = 9;
    CHECK_THROWS_AS(train(net, mislabeled, cfg), std::invalid_argument);
}
