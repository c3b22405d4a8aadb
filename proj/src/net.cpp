#include "fcprune/net.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fcprune/errors.hpp"
#include "fcprune/spectral.hpp"

namespace fcprune {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::linear: return "linear";
        case Activation::softmax: return "softmax";
    }
    return "?";
}

Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    if (s == "softmax") return Activation::softmax;
    throw std::invalid_argument("unknown activation: " + s);
}

DenseNet::DenseNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("DenseNet: no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        if (l.weights.rows() == 0 || l.weights.cols() == 0)
            throw std::invalid_argument("DenseNet: empty weight matrix at layer " + std::to_string(i));
        if (l.bias && l.bias->size() != l.d_out())
            throw std::invalid_argument("DenseNet: bias length mismatch at layer " + std::to_string(i));
        if (i + 1 < layers_.size()) {
            if (l.d_out() != layers_[i + 1].d_in())
                throw std::invalid_argument("DenseNet: dimension chain broken between layers " +
                                            std::to_string(i) + " and " + std::to_string(i + 1));
            if (l.activation == Activation::softmax)
                throw std::invalid_argument("DenseNet: softmax allowed only on the last layer");
        }
    }
    if (output_dim() < 2)
        throw std::invalid_argument("DenseNet: output dimension must be at least 2");
}

DenseNet DenseNet::with_layer_weights(std::size_t index, Matrix weights,
                                      std::optional<std::vector<double>> bias) const {
    if (index >= layers_.size()) throw std::invalid_argument("with_layer_weights: bad index");
    const Layer& old = layers_[index];
    if (weights.rows() != old.d_in() || weights.cols() != old.d_out())
        throw std::invalid_argument("with_layer_weights: shape changed from " + shape_str(old.weights) +
                                    " to " + shape_str(weights));
    std::vector<Layer> ls = layers_;
    ls[index].weights = std::move(weights);
    ls[index].bias = std::move(bias);
    return DenseNet(std::move(ls));
}

void validate_labeled_set(const LabeledSet& set, std::size_t n_classes) {
    if (set.X.cols() != set.y.size())
        throw std::invalid_argument("LabeledSet: X has " + std::to_string(set.X.cols()) +
                                    " columns but y has " + std::to_string(set.y.size()) + " labels");
    for (int label : set.y)
        if (label < 0 || static_cast<std::size_t>(label) >= n_classes)
            throw std::invalid_argument("LabeledSet: label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(n_classes) + ")");
}

namespace {

// W^T Z + bias, columns are samples.
Matrix affine(const Layer& l, const Matrix& z) {
    Matrix pre = matmul(transpose(l.weights), z);
    if (l.bias) {
        for (std::size_t i = 0; i < pre.rows(); ++i) {
            const double b = (*l.bias)[i];
            for (std::size_t j = 0; j < pre.cols(); ++j) pre(i, j) += b;
        }
    }
    return pre;
}

} // namespace

Matrix forward(const DenseNet& net, const Matrix& X) {
    if (X.rows() != net.input_dim())
        throw std::invalid_argument("forward: input has " + std::to_string(X.rows()) +
                                    " rows, net expects " + std::to_string(net.input_dim()));
    Matrix z = X;
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const Layer& l = net.layer(i);
        z = affine(l, z);
        // Softmax is monotone per column: scores and argmax are evaluated on
        // logits, so the last layer's softmax/linear tag applies no transform.
        if (l.activation == Activation::relu) {
            for (double& v : z.values())
                if (v < 0.0) v = 0.0;
        }
    }
    return z;
}

std::vector<int> predict(const DenseNet& net, const Matrix& X) {
    const Matrix logits = forward(net, X);
    std::vector<int> out(logits.cols());
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        std::size_t best = 0;
        double bv = logits(0, j);
        for (std::size_t i = 1; i < logits.rows(); ++i)
            if (logits(i, j) > bv) { bv = logits(i, j); best = i; }
        out[j] = static_cast<int>(best);
    }
    return out;
}

double accuracy(const DenseNet& net, const LabeledSet& set) {
    validate_labeled_set(set, net.output_dim());
    if (set.size() == 0) throw std::invalid_argument("accuracy: empty set");
    const std::vector<int> pred = predict(net, set.X);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < pred.size(); ++j)
        if (pred[j] == set.y[j]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Matrix forward_to_layer(const DenseNet& net, const Matrix& X, std::size_t layer_index) {
    if (layer_index >= net.num_layers())
        throw std::invalid_argument("forward_to_layer: layer index out of range");
    if (X.rows() != net.input_dim())
        throw std::invalid_argument("forward_to_layer: input shape mismatch");
    Matrix z = X;
    for (std::size_t i = 0; i < layer_index; ++i) {
        const Layer& l = net.layer(i);
        z = affine(l, z);
        if (l.activation == Activation::relu)
            for (double& v : z.values())
                if (v < 0.0) v = 0.0;
    }
    return z;
}

LayerTap capture(const DenseNet& net, const Matrix& X, std::size_t layer_index, bool augmented) {
    if (layer_index >= net.num_layers())
        throw std::invalid_argument("capture: layer index out of range");
    const Layer& target = net.layer(layer_index);
    if (target.activation != Activation::relu)
        throw std::invalid_argument("capture: layer " + std::to_string(layer_index) +
                                    " is " + activation_name(target.activation) +
                                    "; only relu layers can be tapped");
    Matrix a = forward_to_layer(net, X, layer_index);
    Matrix b = relu(affine(target, a));

    // Capture-time invariant: B must agree with an independent recomputation.
    {
        Matrix check = matmul(transpose(target.weights), a);
        if (target.bias)
            for (std::size_t i = 0; i < check.rows(); ++i)
                for (std::size_t j = 0; j < check.cols(); ++j) check(i, j) += (*target.bias)[i];
        for (double& v : check.values())
            if (v < 0.0) v = 0.0;
        if (max_abs(b - check) > 1e-9)
            throw numeric_error("capture: tap failed recomputation check");
    }

    LayerTap tap;
    tap.layer_index = layer_index;
    tap.B = std::move(b);
    tap.augmented = augmented && target.bias.has_value();
    tap.A = tap.augmented ? append_ones_row(a) : std::move(a);
    return tap;
}

Matrix augmented_weights(const Layer& layer) {
    if (!layer.bias) return layer.weights;
    return append_row(layer.weights, *layer.bias);
}

double score_from_logits(const std::vector<double>& logits, std::size_t predicted) {
    if (logits.size() < 2) throw std::invalid_argument("score: need at least 2 classes");
    if (predicted >= logits.size()) throw std::invalid_argument("score: predicted class out of range");
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (j == predicted) continue;
        runner_up = std::max(runner_up, logits[j]);
    }
    return std::sqrt(2.0) * (logits[predicted] - runner_up);
}

double score(const DenseNet& net, const std::vector<double>& x) {
    Matrix col(x.size(), 1, x);
    const Matrix logits = forward(net, col);
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.rows(); ++i)
        if (logits(i, 0) > logits(best, 0)) best = i;
    return score_from_logits(get_col(logits, 0), best);
}

MinScore min_score(const DenseNet& net, const LabeledSet& set) {
    if (set.size() == 0) throw std::invalid_argument("min_score: empty set");
    const Matrix logits = forward(net, set.X);
    MinScore out;
    out.value = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < logits.rows(); ++i)
            if (logits(i, j) > logits(best, j)) best = i;
        const double s = score_from_logits(get_col(logits, j), best);
        if (s < out.value) { out.value = s; out.index = j; }
    }
    return out;
}

MarginBound margin_lower_bound(const DenseNet& net, const LabeledSet& set) {
    MarginBound mb;
    const MinScore ms = min_score(net, set);
    mb.min_score = ms.value;
    mb.spectral_norms.reserve(net.num_layers());
    for (std::size_t i = 0; i < net.num_layers(); ++i)
        mb.spectral_norms.push_back(spectral_norm(net.layer(i).weights));
    if (!(ms.value > 0.0)) {
        mb.flagged_nonpositive = true;
        mb.gamma = 0.0;
        return mb;
    }
    double prod = 1.0;
    for (double s : mb.spectral_norms) prod *= s;
    mb.gamma = ms.value / prod;
    return mb;
}

} // namespace fcprune
