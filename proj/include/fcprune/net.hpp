#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fcprune/matrix.hpp"

namespace fcprune {

enum class Activation { relu, linear, softmax };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& s);

/// One fully connected layer z -> act(W^T z + bias). Weights are stored
/// d_in x d_out, applied transposed.
struct Layer {
    Matrix weights;
    std::optional<std::vector<double>> bias; // length d_out
    Activation activation = Activation::relu;

    std::size_t d_in() const { return weights.rows(); }
    std::size_t d_out() const { return weights.cols(); }
};

/// Feedforward classifier: a chain of fully connected layers. Hidden layers
/// use relu; only the last layer may be softmax (or linear). Immutable after
/// construction.
class DenseNet {
public:
    explicit DenseNet(std::vector<Layer> layers);

    const std::vector<Layer>& layers() const { return layers_; }
    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    std::size_t num_layers() const { return layers_.size(); }
    std::size_t input_dim() const { return layers_.front().d_in(); }
    std::size_t output_dim() const { return layers_.back().d_out(); }

    /// New net with layer `index` replaced (shape and activation must match).
    DenseNet with_layer_weights(std::size_t index, Matrix weights,
                                std::optional<std::vector<double>> bias) const;

private:
    std::vector<Layer> layers_;
};

struct LabeledSet {
    Matrix X;               // d x m, samples as columns
    std::vector<int> y;     // class indices, length m

    std::size_t size() const { return y.size(); }
};

void validate_labeled_set(const LabeledSet& set, std::size_t n_classes);

/// Captured activations of one layer over a sample batch: A holds the inputs
/// reaching the layer, B the post-relu outputs. When `augmented`, A carries a
/// trailing all-ones row so a bias column can ride along inside the weight
/// matrix algebra.
struct LayerTap {
    std::size_t layer_index = 0;
    Matrix A;
    Matrix B;
    bool augmented = false;
};

/// Pre-softmax logits for every column of X.
Matrix forward(const DenseNet& net, const Matrix& X);

/// Activations entering layer `layer_index` (the input itself for index 0).
Matrix forward_to_layer(const DenseNet& net, const Matrix& X, std::size_t layer_index);

/// Argmax class per column; ties break toward the lowest index.
std::vector<int> predict(const DenseNet& net, const Matrix& X);

double accuracy(const DenseNet& net, const LabeledSet& set);

/// Activations around relu layer `layer_index`. Throws std::invalid_argument
/// when the layer is not a relu layer (pruning is restricted to the
/// nonlinear fully connected layers). The tap is verified against an
/// independent recomputation of relu(W^T A + bias) at capture time.
LayerTap capture(const DenseNet& net, const Matrix& X, std::size_t layer_index,
                 bool augmented = false);

/// Weight matrix of layer `index` with the bias row appended (pairs with an
/// augmented tap). Identity copy when the layer has no bias and augmented
/// taps were not requested.
Matrix augmented_weights(const Layer& layer);

/// Score of a single logit column for a given predicted class:
/// min over j != predicted of sqrt(2) * (logits[predicted] - logits[j]).
double score_from_logits(const std::vector<double>& logits, std::size_t predicted);

/// Score of sample column x under the net's own prediction.
double score(const DenseNet& net, const std::vector<double>& x);

struct MinScore {
    double value = 0.0;
    std::size_t index = 0; // lowest index attaining the minimum
};

MinScore min_score(const DenseNet& net, const LabeledSet& set);

struct MarginBound {
    double gamma = 0.0;          // o(s~) / prod_i |W_i|_2, or 0 when flagged
    double min_score = 0.0;
    std::vector<double> spectral_norms; // per layer, output layer included
    bool flagged_nonpositive = false;   // min score <= 0: bound not applicable
};

/// Lower bound on the classification margin: smallest score over the set
/// divided by the product of all layer spectral norms (the output layer's
/// weight matrix is included; its norm is reported separately in the
/// ingredient list). Returns 0 with a flag when the smallest score is not
/// strictly positive.
MarginBound margin_lower_bound(const DenseNet& net, const LabeledSet& set);

} // namespace fcprune
