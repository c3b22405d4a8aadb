#include "fcprune/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fcprune/spectral.hpp"

namespace fcprune {

namespace {

const char* kDisclaimer =
    "generalization-error bounds of this family are diagnostics; "
    "at realistic scales the numeric values are vacuous";

const char* kUncheckedHypothesis = "assumes-pruning-preserves-training-decisions";

} // namespace

void ManifoldParams::validate() const {
    if (!(c_m > 0.0)) throw std::invalid_argument("ManifoldParams: C_M must be positive");
    if (k == 0) throw std::invalid_argument("ManifoldParams: k must be >= 1");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("ManifoldParams: delta must be in (0,1)");
    if (m == 0) throw std::invalid_argument("ManifoldParams: m must be >= 1");
    if (n_y < 2) throw std::invalid_argument("ManifoldParams: N_y must be >= 2");
}

double a_const(const ManifoldParams& mp) {
    mp.validate();
    const double kd = static_cast<double>(mp.k);
    return std::sqrt(std::log(2.0) * static_cast<double>(mp.n_y) * std::pow(2.0, kd + 1.0) *
                     std::pow(mp.c_m, kd) / static_cast<double>(mp.m));
}

double b_const(const ManifoldParams& mp) {
    mp.validate();
    return std::sqrt(2.0 * std::log(1.0 / mp.delta) / static_cast<double>(mp.m));
}

double c1_error(const LayerTap& tap, const Matrix& w, const Matrix& u) {
    if (w.rows() != u.rows() || w.cols() != u.cols())
        throw std::invalid_argument("c1_error: W and U shapes differ");
    const Matrix out_w = relu(matmul(transpose(w), tap.A));
    const Matrix out_u = relu(matmul(transpose(u), tap.A));
    double worst = 0.0;
    for (std::size_t j = 0; j < out_w.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < out_w.rows(); ++i) {
            const double d = out_u(i, j) - out_w(i, j);
            s += d * d;
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

namespace {

// Margin, spectral norms and the A/B constants shared by both theorems.
BoundReport base_report(const DenseNet& net, const LabeledSet& set, const ManifoldParams& mp) {
    mp.validate();
    BoundReport rep;
    rep.params = mp;
    rep.a = a_const(mp);
    rep.b = b_const(mp);
    const MarginBound mb = margin_lower_bound(net, set);
    rep.gamma = mb.gamma;
    rep.min_score = mb.min_score;
    rep.spectral_norms = mb.spectral_norms;
    if (mb.flagged_nonpositive) rep.flags.push_back("nonpositive-min-score");
    rep.flags.push_back(kUncheckedHypothesis);
    rep.disclaimer = kDisclaimer;
    return rep;
}

void finish_report(BoundReport& rep) {
    rep.effective_margin = rep.gamma - rep.penalty;
    if (rep.effective_margin > 0.0) {
        const double kd = static_cast<double>(rep.params.k);
        rep.ge_bound = rep.a * std::pow(rep.effective_margin, -kd / 2.0) + rep.b;
    } else {
        rep.flags.push_back("vacuous-precondition");
    }
}

} // namespace

BoundReport theorem_5_1(const DenseNet& net, std::size_t pruned_layer, const Matrix& u,
                        const LabeledSet& set, const ManifoldParams& mp,
                        const std::optional<std::vector<double>>& bias_override) {
    if (pruned_layer >= net.num_layers())
        throw std::invalid_argument("theorem_5_1: layer index out of range");
    const Layer& layer = net.layer(pruned_layer);
    if (u.rows() != layer.weights.rows() || u.cols() != layer.weights.cols())
        throw std::invalid_argument("theorem_5_1: U shape differs from the layer weights");

    BoundReport rep = base_report(net, set, mp);
    rep.theorem = "5.1";
    rep.perturbed_layers = {pruned_layer};

    // C1 = max_j |f_i*(x_j, U) - f_i*(x_j, W)|_2 through the layer's own
    // map: relu for hidden layers, the affine output for the last one.
    LayerTap tap;
    tap.layer_index = pruned_layer;
    tap.augmented = layer.bias.has_value();
    {
        Matrix a = forward_to_layer(net, set.X, pruned_layer);
        tap.A = tap.augmented ? append_ones_row(a) : std::move(a);
    }
    const Matrix w_aug = augmented_weights(layer);
    const std::optional<std::vector<double>>& u_bias = bias_override ? bias_override : layer.bias;
    const Matrix u_aug = layer.bias ? append_row(u, u_bias ? *u_bias : std::vector<double>(u.cols(), 0.0)) : u;
    if (layer.activation == Activation::relu) {
        tap.B = relu(matmul(transpose(w_aug), tap.A));
        rep.c1 = c1_error(tap, w_aug, u_aug);
    } else {
        const Matrix diff = matmul(transpose(u_aug - w_aug), tap.A);
        double worst = 0.0;
        for (double n : l2_col_norms(diff)) worst = std::max(worst, n);
        rep.c1 = worst;
    }

    double prod_after = 1.0; // layers strictly after the pruned one
    double prod_all = 1.0;
    for (std::size_t i = 0; i < rep.spectral_norms.size(); ++i) {
        prod_all *= rep.spectral_norms[i];
        if (i > pruned_layer) prod_after *= rep.spectral_norms[i];
    }
    rep.penalty = *rep.c1 * prod_after / prod_all;
    finish_report(rep);
    return rep;
}

BoundReport theorem_5_2(const DenseNet& net,
                        const std::vector<std::pair<std::size_t, Matrix>>& perturbed,
                        const LabeledSet& set, const ManifoldParams& mp) {
    if (perturbed.empty()) throw std::invalid_argument("theorem_5_2: empty perturbation list");

    BoundReport rep = base_report(net, set, mp);
    rep.theorem = "5.2";

    const std::vector<double> col_norms = l2_col_norms(set.X);
    double d_radius = 0.0;
    for (double n : col_norms) d_radius = std::max(d_radius, n);
    rep.d_radius = d_radius;

    const double layer_count = static_cast<double>(net.num_layers());
    double ratio_sum = 0.0;
    for (const auto& [idx, u] : perturbed) {
        if (idx >= net.num_layers())
            throw std::invalid_argument("theorem_5_2: layer index out of range");
        const Layer& layer = net.layer(idx);
        if (u.rows() != layer.weights.rows() || u.cols() != layer.weights.cols())
            throw std::invalid_argument("theorem_5_2: U shape differs at layer " + std::to_string(idx));
        const Matrix h = layer.weights - u;
        const double h_norm = spectral_norm(h);
        const double w_norm = rep.spectral_norms[idx];
        rep.perturbed_layers.push_back(idx);
        rep.h_norms.push_back(h_norm);
        ratio_sum += (w_norm > 0.0) ? h_norm / w_norm : 0.0;
        if (h_norm > w_norm / layer_count)
            rep.flags.push_back("perturbation-hypothesis-violated-layer-" + std::to_string(idx));
    }
    rep.penalty = std::numbers::e * d_radius * d_radius * ratio_sum;
    finish_report(rep);
    return rep;
}

std::vector<SweepCell> layer_sweep(const DenseNet& net, const LabeledSet& train,
                                   const LabeledSet& test, const std::vector<double>& sparsities,
                                   const std::string& method, const ManifoldParams& mp,
                                   const FetaConfig& feta_cfg) {
    if (method != "threshold" && method != "feta")
        throw std::invalid_argument("layer_sweep: method must be threshold or feta");

    std::vector<SweepCell> cells;
    for (std::size_t li = 0; li < net.num_layers(); ++li) {
        if (net.layer(li).activation != Activation::relu) continue;
        for (double s : sparsities) {
            const Layer& layer = net.layer(li);
            Matrix u = layer.weights;
            std::optional<std::vector<double>> bias = layer.bias;
            if (s > 0.0) {
                if (method == "threshold") {
                    u = hard_threshold(layer.weights,
                                       {ThresholdSpec::Mode::sparsity, s});
                } else {
                    LayerTap tap = capture(net, train.X, li, layer.bias.has_value());
                    FetaConfig cfg = feta_cfg;
                    cfg.target_sparsity = s;
                    PruneResult pr = feta(augmented_weights(layer), tap, cfg);
                    if (tap.augmented) {
                        u = Matrix(layer.weights.rows(), layer.weights.cols());
                        for (std::size_t i = 0; i < u.rows(); ++i)
                            for (std::size_t j = 0; j < u.cols(); ++j) u(i, j) = pr.U(i, j);
                        std::vector<double> nb(u.cols());
                        for (std::size_t j = 0; j < u.cols(); ++j) nb[j] = pr.U(u.rows(), j);
                        bias = nb;
                    } else {
                        u = pr.U;
                    }
                }
            }
            const DenseNet pruned = net.with_layer_weights(li, u, bias);
            BoundReport rep = theorem_5_1(net, li, u, train, mp, bias);
            SweepCell cell;
            cell.layer = li;
            cell.sparsity = s;
            cell.method = method;
            cell.accuracy = accuracy(pruned, test);
            cell.margin = rep.effective_margin;
            cell.penalty = rep.penalty;
            cell.ge_bound = rep.ge_bound;
            cell.flags = rep.flags;
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

} // namespace fcprune
