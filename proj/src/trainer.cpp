#include "fcprune/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "fcprune/errors.hpp"

namespace fcprune {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
    if (!(decay > 0.0)) throw std::invalid_argument("TrainConfig: decay must be positive");
    if (batch == 0) throw std::invalid_argument("TrainConfig: batch must be positive");
    // epochs == 0 is a documented no-op: train returns the initial net.
}

TrainMask mask_from_zeros(const DenseNet& net) {
    TrainMask mask;
    for (const Layer& l : net.layers()) {
        Matrix m(l.weights.rows(), l.weights.cols());
        for (std::size_t i = 0; i < m.size(); ++i)
            m.values()[i] = (l.weights.values()[i] != 0.0) ? 1.0 : 0.0;
        mask.weight_masks.push_back(std::move(m));
    }
    return mask;
}

namespace {

struct ForwardCache {
    std::vector<Matrix> pre;  // pre-activation per layer
    std::vector<Matrix> post; // post-activation per layer (post[i] feeds layer i+1)
};

ForwardCache run_forward(const DenseNet& net, const Matrix& X) {
    ForwardCache c;
    Matrix z = X;
    for (const Layer& l : net.layers()) {
        Matrix pre = matmul(transpose(l.weights), z);
        if (l.bias)
            for (std::size_t i = 0; i < pre.rows(); ++i)
                for (std::size_t j = 0; j < pre.cols(); ++j) pre(i, j) += (*l.bias)[i];
        Matrix post = pre;
        if (l.activation == Activation::relu)
            for (double& v : post.values())
                if (v < 0.0) v = 0.0;
        c.pre.push_back(std::move(pre));
        z = post;
        c.post.push_back(std::move(post));
    }
    return c;
}

// Softmax CE summed over columns; grad w.r.t. logits written into dlogits.
double ce_loss_and_dlogits(const Matrix& logits, const std::vector<int>& y, Matrix& dlogits) {
    const std::size_t c = logits.rows(), m = logits.cols();
    dlogits = Matrix(c, m);
    double loss_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double zmax = logits(0, j);
        for (std::size_t i = 1; i < c; ++i) zmax = std::max(zmax, logits(i, j));
        double sum = 0.0;
        for (std::size_t i = 0; i < c; ++i) sum += std::exp(logits(i, j) - zmax);
        const double lse = zmax + std::log(sum);
        loss_sum += lse - logits(static_cast<std::size_t>(y[j]), j);
        for (std::size_t i = 0; i < c; ++i) {
            double p = std::exp(logits(i, j) - lse);
            dlogits(i, j) = p - (static_cast<std::size_t>(y[j]) == i ? 1.0 : 0.0);
        }
    }
    return loss_sum;
}

double quadratic_loss_and_dlogits(const Matrix& logits, const std::vector<int>& y, Matrix& dlogits) {
    const std::size_t c = logits.rows(), m = logits.cols();
    dlogits = Matrix(c, m);
    double loss_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < c; ++i) {
            const double t = (static_cast<std::size_t>(y[j]) == i) ? 1.0 : 0.0;
            const double d = logits(i, j) - t;
            loss_sum += 0.5 * d * d;
            dlogits(i, j) = d;
        }
    return loss_sum;
}

struct Grads {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b; // empty vector when layer has no bias
};

// Backprop through the relu/linear stack. dlogits is the gradient w.r.t. the
// final pre-activation (softmax and linear outputs coincide there).
Grads backprop(const DenseNet& net, const Matrix& X, const ForwardCache& cache, Matrix dlogits) {
    Grads g;
    g.w.resize(net.num_layers());
    g.b.resize(net.num_layers());
    Matrix delta = std::move(dlogits); // d loss / d pre[l]
    for (std::size_t li = net.num_layers(); li-- > 0;) {
        const Layer& l = net.layer(li);
        const Matrix& input = (li == 0) ? X : cache.post[li - 1];
        g.w[li] = matmul(input, transpose(delta)); // d_in x d_out
        if (l.bias) {
            std::vector<double> db(l.d_out(), 0.0);
            for (std::size_t i = 0; i < delta.rows(); ++i)
                for (std::size_t j = 0; j < delta.cols(); ++j) db[i] += delta(i, j);
            g.b[li] = std::move(db);
        }
        if (li > 0) {
            Matrix prev = matmul(l.weights, delta); // d loss / d post[li-1]
            const Layer& below = net.layer(li - 1);
            if (below.activation == Activation::relu) {
                const Matrix& pre_below = cache.pre[li - 1];
                for (std::size_t i = 0; i < prev.size(); ++i)
                    if (pre_below.values()[i] <= 0.0) prev.values()[i] = 0.0;
            }
            delta = std::move(prev);
        }
    }
    return g;
}

double loss_and_grads(const DenseNet& net, const Matrix& X, const std::vector<int>& y,
                      ProbeLoss loss, Grads& out) {
    ForwardCache cache = run_forward(net, X);
    Matrix dlogits;
    const Matrix& logits = cache.pre.back();
    const double l = (loss == ProbeLoss::cross_entropy)
                         ? ce_loss_and_dlogits(logits, y, dlogits)
                         : quadratic_loss_and_dlogits(logits, y, dlogits);
    out = backprop(net, X, cache, std::move(dlogits));
    return l;
}

} // namespace

TrainResult train(const DenseNet& net, const LabeledSet& set, const TrainConfig& cfg,
                  const std::optional<TrainMask>& mask) {
    cfg.validate();
    validate_labeled_set(set, net.output_dim());
    if (set.X.rows() != net.input_dim())
        throw std::invalid_argument("train: data dimension mismatch");
    if (mask) {
        if (mask->weight_masks.size() != net.num_layers())
            throw std::invalid_argument("train: mask layer count mismatch");
        for (std::size_t i = 0; i < net.num_layers(); ++i)
            if (mask->weight_masks[i].rows() != net.layer(i).weights.rows() ||
                mask->weight_masks[i].cols() != net.layer(i).weights.cols())
                throw std::invalid_argument("train: mask shape mismatch at layer " + std::to_string(i));
    }

    std::vector<Layer> layers = net.layers();
    if (mask)
        for (std::size_t li = 0; li < layers.size(); ++li)
            layers[li].weights = hadamard(layers[li].weights, mask->weight_masks[li]);

    // Momentum buffers.
    std::vector<Matrix> vel_w;
    std::vector<std::vector<double>> vel_b;
    for (const Layer& l : layers) {
        vel_w.emplace_back(l.weights.rows(), l.weights.cols());
        vel_b.emplace_back(l.bias ? l.bias->size() : 0, 0.0);
    }

    Rng rng(cfg.seed);
    const std::size_t m = set.size();
    TrainResult result{net, {}};
    double lr = cfg.lr;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = rng.permutation(m);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < m; start += cfg.batch) {
            const std::size_t count = std::min(cfg.batch, m - start);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + start + count);
            Matrix xb = gather_cols(set.X, idx);
            std::vector<int> yb(count);
            for (std::size_t j = 0; j < count; ++j) yb[j] = set.y[idx[j]];

            DenseNet current(layers);
            Grads g;
            const double batch_loss = loss_and_grads(current, xb, yb, ProbeLoss::cross_entropy, g);
            loss_sum += batch_loss;
            if (!std::isfinite(batch_loss))
                throw numeric_error("train: loss diverged at epoch " + std::to_string(epoch));

            const double scale = 1.0 / static_cast<double>(count);
            for (std::size_t li = 0; li < layers.size(); ++li) {
                Matrix& w = layers[li].weights;
                Matrix& vw = vel_w[li];
                const Matrix* wm = mask ? &mask->weight_masks[li] : nullptr;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    double grad = g.w[li].values()[i] * scale;
                    if (wm && wm->values()[i] == 0.0) grad = 0.0;
                    vw.values()[i] = cfg.momentum * vw.values()[i] - lr * grad;
                    if (wm && wm->values()[i] == 0.0) continue;
                    w.values()[i] += vw.values()[i];
                }
                if (layers[li].bias) {
                    auto& b = *layers[li].bias;
                    auto& vb = vel_b[li];
                    for (std::size_t i = 0; i < b.size(); ++i) {
                        vb[i] = cfg.momentum * vb[i] - lr * g.b[li][i] * scale;
                        b[i] += vb[i];
                    }
                }
            }
        }

        DenseNet current(layers);
        EpochStats st;
        st.epoch = epoch;
        st.lr = lr;
        st.mean_loss = loss_sum / static_cast<double>(m);
        st.train_acc = accuracy(current, set);
        result.trace.push_back(st);
        lr *= cfg.decay;
    }

    result.net = DenseNet(layers);
    return result;
}

DenseNet init_net(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t n_classes, bool with_bias, std::uint64_t seed) {
    if (n_classes < 2) throw std::invalid_argument("init_net: need at least 2 classes");
    Rng rng(seed);
    std::vector<Layer> layers;
    std::size_t d_in = input_dim;
    auto make_layer = [&](std::size_t d_out, Activation act) {
        Layer l;
        l.weights = Matrix(d_in, d_out);
        const double a = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
        for (double& v : l.weights.values()) v = rng.uniform(-a, a);
        if (with_bias) l.bias = std::vector<double>(d_out, 0.0);
        l.activation = act;
        layers.push_back(std::move(l));
        d_in = d_out;
    };
    for (std::size_t h : hidden) make_layer(h, Activation::relu);
    make_layer(n_classes, Activation::softmax);
    return DenseNet(std::move(layers));
}

double probe_loss_value(const DenseNet& net, const LabeledSet& set, ProbeLoss loss) {
    ForwardCache cache = run_forward(net, set.X);
    Matrix dl;
    return (loss == ProbeLoss::cross_entropy) ? ce_loss_and_dlogits(cache.pre.back(), set.y, dl)
                                              : quadratic_loss_and_dlogits(cache.pre.back(), set.y, dl);
}

std::vector<double> analytic_gradients(const DenseNet& net, const LabeledSet& set, ProbeLoss loss) {
    Grads g;
    loss_and_grads(net, set.X, set.y, loss, g);
    std::vector<double> flat;
    for (std::size_t li = 0; li < net.num_layers(); ++li) {
        flat.insert(flat.end(), g.w[li].values().begin(), g.w[li].values().end());
        if (net.layer(li).bias) flat.insert(flat.end(), g.b[li].begin(), g.b[li].end());
    }
    return flat;
}

namespace {

std::size_t param_count(const DenseNet& net) {
    std::size_t n = 0;
    for (const Layer& l : net.layers()) {
        n += l.weights.size();
        if (l.bias) n += l.bias->size();
    }
    return n;
}

// Nets are immutable; finite differences run on a mutable copy of the layers.
double loss_with_nudge(std::vector<Layer> layers, std::size_t flat_index, double delta,
                       const LabeledSet& set, ProbeLoss loss) {
    std::size_t offset = 0;
    for (Layer& l : layers) {
        if (flat_index < offset + l.weights.size()) {
            l.weights.values()[flat_index - offset] += delta;
            break;
        }
        offset += l.weights.size();
        if (l.bias) {
            if (flat_index < offset + l.bias->size()) {
                (*l.bias)[flat_index - offset] += delta;
                break;
            }
            offset += l.bias->size();
        }
    }
    return probe_loss_value(DenseNet(std::move(layers)), set, loss);
}

} // namespace

double max_rel_error_vs_fd(const DenseNet& net, const LabeledSet& set,
                           const std::vector<double>& grads, ProbeLoss loss,
                           std::size_t n_probes, double step, Rng rng) {
    const std::size_t total = param_count(net);
    if (grads.size() != total) throw std::invalid_argument("max_rel_error_vs_fd: gradient length mismatch");
    std::vector<std::size_t> order = rng.permutation(total);
    const std::size_t probes = std::min(n_probes, total);
    double worst = 0.0;
    for (std::size_t p = 0; p < probes; ++p) {
        const std::size_t idx = order[p];
        const double up = loss_with_nudge(net.layers(), idx, step, set, loss);
        const double dn = loss_with_nudge(net.layers(), idx, -step, set, loss);
        const double fd = (up - dn) / (2.0 * step);
        const double a = grads[idx];
        const double denom = std::max({std::abs(a), std::abs(fd), 1e-2});
        worst = std::max(worst, std::abs(a - fd) / denom);
    }
    return worst;
}

double grad_check(const DenseNet& net, const LabeledSet& set, ProbeLoss loss,
                  std::size_t n_probes, double step, Rng rng) {
    return max_rel_error_vs_fd(net, set, analytic_gradients(net, set, loss), loss, n_probes, step, rng);
}

} // namespace fcprune
