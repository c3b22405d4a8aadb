#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fcprune/matrix.hpp"
#include "fcprune/net.hpp"
#include "fcprune/rng.hpp"

namespace fcprune {

struct ThresholdSpec {
    enum class Mode { absolute, sparsity };
    Mode mode = Mode::absolute;
    double value = 0.0; // cutoff t (absolute) or target zero fraction s in [0,1)

    void validate() const;
};

/// Magnitude pruning W * I(|W| > t). In sparsity mode the cutoff is the
/// s-quantile (nearest rank) of |W|; entries exactly at the cutoff are
/// zeroed, so the achieved sparsity is >= s up to quantile ties.
Matrix hard_threshold(const Matrix& w, const ThresholdSpec& spec);

struct FetaConfig {
    double lambda = 0.0;     // l1 weight; ignored when target_sparsity is set
    double theta = 20.0;     // softplus sharpness
    std::size_t outer_iters = 8;  // K, outer DCA iterations
    std::size_t stages = 3;       // S, SVRG stages per inner solve
    std::size_t inner_steps = 0;  // T; 0 means ceil(m / batch)
    std::size_t batch = 200;
    double eta = 0.001;
    double eta_fallback = 0.0001;
    double beta = 0.95;
    std::uint64_t seed = 0;
    std::optional<double> target_sparsity; // bisect lambda to reach this
    double zero_eps = 1e-8;
    double rel_stop = 1e-4; // outer early stop on |U_k+1 - U_k|_F / |U_k|_F

    // Trailing rows of the iterate excluded from the l1 penalty and the
    // sparsity count (1 when optimizing a bias-augmented matrix, else 0).
    std::size_t unpenalized_tail_rows = 0;

    void validate() const;
    std::size_t effective_inner_steps(std::size_t m) const;
};

struct PruneResult {
    Matrix U;
    double sparsity = 0.0;    // fraction of penalized entries with |u| <= zero_eps
    std::vector<double> objective_trace; // exact-relu objective per outer iteration
    double layer_error = 0.0; // |relu(U^T A) - B|_F over the tap
    double wall_time = 0.0;   // seconds, prune computation only
    double lambda_used = 0.0; // final l1 weight (after bisection when used)
};

/// Convex split of the layer reconstruction loss: g collects the squared
/// smoothed-relu responses plus b^2, h the cross terms 2*b*rho_theta
/// restricted to b > 0. Both are sums over every sample column. B must be
/// entrywise nonnegative (relu outputs).
struct DcParts {
    double g = 0.0;
    double h = 0.0;
};

DcParts dc_parts(const Matrix& U, const Matrix& A, const Matrix& B, double theta);

/// Exact-relu objective |relu(U^T A) - B|_F^2 + lambda * sum of |penalized
/// entries|; the quantity the outer trace records.
double exact_objective(const Matrix& U, const Matrix& A, const Matrix& B, double lambda,
                       std::size_t unpenalized_tail_rows = 0);

/// Full-batch gradient of h at U (one pass over all samples).
Matrix grad_h(const Matrix& U, const Matrix& A, const Matrix& B, double theta);

/// Minibatch estimate of the smooth part's gradient: the rho_theta^2 term is
/// summed over the batch columns and rescaled by m_total/|batch|; the linear
/// term C is subtracted exactly (it has zero variance). B_batch rides along
/// for shape checking only; the smooth part's gradient does not depend on B.
Matrix grad_g_minibatch(const Matrix& U, const Matrix& A_batch, const Matrix& B_batch,
                        double theta, const Matrix& C, std::size_t m_total);

/// Elementwise soft threshold sign(v) * max(|v| - tau, 0).
Matrix prox_l1(const Matrix& v, double tau);
double prox_l1_scalar(double v, double tau);

/// Accelerated proximal SVRG for the linearized DCA subproblem
///   min_U g(U) + lambda*Omega(U) - Tr(U^T C).
/// Per stage: full gradient at the snapshot, then inner_steps
/// variance-reduced proximal steps with momentum beta. Throws numeric_error
/// naming eta when an iterate turns non-finite.
Matrix acc_prox_svrg(const Matrix& U0, const Matrix& A, const Matrix& B, const Matrix& C,
                     const FetaConfig& cfg);

/// The full pruning algorithm: warm start at W, K outer DCA iterations each
/// linearizing h and solving the convex subproblem with acc_prox_svrg, early
/// stop when successive iterates agree to rel_stop. Entries at or below
/// zero_eps are snapped to exact zero. When target_sparsity is set, lambda
/// is found by bisection over short runs first.
PruneResult feta(const Matrix& w, const LayerTap& tap, const FetaConfig& cfg);

} // namespace fcprune
