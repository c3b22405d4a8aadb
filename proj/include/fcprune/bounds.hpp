#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fcprune/net.hpp"
#include "fcprune/pruner.hpp"

namespace fcprune {

/// Data-manifold and sample-size constants entering the generalization
/// bounds. C_M and k are user inputs: the regularity constant and intrinsic
/// dimension of the data manifold are not estimated from data here (k may be
/// taken from a PCA explained-variance heuristic upstream, clearly labeled).
struct ManifoldParams {
    double c_m = 1.0;     // regularity constant, > 0
    std::size_t k = 1;    // intrinsic dimension, >= 1
    double delta = 0.01;  // confidence level in (0,1)
    std::size_t m = 1;    // training sample count
    std::size_t n_y = 2;  // class count

    void validate() const;
};

/// sqrt(ln2 * N_y * 2^(k+1) * C_M^k / m)
double a_const(const ManifoldParams& mp);
/// sqrt(2 * ln(1/delta) / m)
double b_const(const ManifoldParams& mp);

/// Every ingredient of a bound evaluation, serializable so the final value
/// can be re-derived from the report alone.
struct BoundReport {
    std::string theorem;                 // "5.1" or "5.2"
    double gamma = 0.0;                  // margin lower bound of the unpruned net
    double min_score = 0.0;
    double penalty = 0.0;                // C1-term (5.1) or e*D^2*sum ratio (5.2)
    double effective_margin = 0.0;       // gamma - penalty
    double a = 0.0;
    double b = 0.0;
    std::optional<double> ge_bound;      // absent when effective_margin <= 0
    std::vector<double> spectral_norms;  // per layer, output layer included
    std::optional<double> c1;            // theorem 5.1 only
    std::vector<double> h_norms;         // theorem 5.2: per perturbed layer |H_i|_2
    std::vector<std::size_t> perturbed_layers;
    std::optional<double> d_radius;      // theorem 5.2: max training |x|_2
    ManifoldParams params;
    std::vector<std::string> flags;
    std::string disclaimer;              // bounds are diagnostics, vacuous at realistic scales
};

/// Maximum per-sample l2 output error of a pruned layer over the tap,
/// with the exact relu: max_j |relu(U^T a_j) - relu(W^T a_j)|_2.
double c1_error(const LayerTap& tap, const Matrix& w, const Matrix& u);

/// Single-layer bound: GE <= A * (gamma - C1 * prod_{i>i*}|W_i| / prod_i|W_i|)^(-k/2) + B.
/// The margin comes from the unpruned net's smallest score; U replaces the
/// weights of `pruned_layer`. The layer's bias is kept unless an override is
/// given (a pruner that optimized the augmented matrix updates both).
BoundReport theorem_5_1(const DenseNet& net, std::size_t pruned_layer, const Matrix& u,
                        const LabeledSet& set, const ManifoldParams& mp,
                        const std::optional<std::vector<double>>& bias_override = std::nullopt);

/// Multi-layer bound via perturbation matrices H_i = W_i - U_i:
/// penalty = e * D^2 * sum_i |H_i|_2 / |W_i|_2. Layers violating the
/// perturbation-bound hypothesis |H_i|_2 <= |W_i|_2 / L are flagged with a
/// warning, not rejected.
BoundReport theorem_5_2(const DenseNet& net,
                        const std::vector<std::pair<std::size_t, Matrix>>& perturbed,
                        const LabeledSet& set, const ManifoldParams& mp);

struct SweepCell {
    std::size_t layer = 0;
    double sparsity = 0.0;
    std::string method;
    double accuracy = 0.0;
    double margin = 0.0;   // effective margin of the theorem-5.1 report
    double penalty = 0.0;
    std::optional<double> ge_bound;
    std::vector<std::string> flags;
};

/// Prunes each relu layer on its own to each sparsity level and records the
/// resulting test accuracy together with the theorem-5.1 diagnostics. Rows
/// are ordered by (layer, sparsity); sparsity 0 keeps the layer untouched.
std::vector<SweepCell> layer_sweep(const DenseNet& net, const LabeledSet& train,
                                   const LabeledSet& test, const std::vector<double>& sparsities,
                                   const std::string& method, const ManifoldParams& mp,
                                   const FetaConfig& feta_cfg);

} // namespace fcprune
