#pragma once

#include <vector>

#include <Eigen/Dense>

#include "posekit/embedding.hpp"
#include "posekit/so3_grid.hpp"

namespace posekit {

using MatX = Eigen::MatrixXd;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct ScalarGrad {
    double loss = 0.0;
    VecX grad;
};

/// Per-bin sigmoid binary cross entropy against soft labels, computed in
/// logit space so log(0) never occurs. Gradient is wrt the logits:
/// (sigmoid(logit_i) - y_i) / N.
ScalarGrad soft_bce_loss(const VecX& logits, const SoftLabelVector& labels);

/// Softmax cross entropy with log-sum-exp stabilization; gradient is
/// softmax - onehot.
ScalarGrad cross_entropy_loss(const VecX& logits, int gt_class);

struct HuberGrad {
    double loss = 0.0;
    Vec3 grad = Vec3::Zero();
};

/// Per-component Huber (quadratic within delta, linear beyond), summed
/// and averaged over the three components.
HuberGrad huber_loss(const Vec3& pred, const Vec3& target, double delta = 1.0);

/// GD(sixd_to_rotation(pred), target) with the analytic gradient chained
/// through Gram-Schmidt. The acos argument is clamped to
/// [-1 + 1e-7, 1 - 1e-7]; inside the clamped shells the gradient is 0.
double sixd_geodesic(const Vec6& pred, const Mat3& target, Vec6* grad = nullptr);

struct DeltaGeodesicGrad {
    double loss = 0.0;
    MatX grad;  // N x 6, rows are (a1, a2); zero for inactive bins
};

/// (1/N) sum over active bins of GD(sixd(pred_i), target_i). pred rows
/// are 6D reps; targets indexed by bin.
DeltaGeodesicGrad delta_geodesic_loss(const MatX& pred_sixd,
                                      const std::vector<Mat3>& targets,
                                      const std::vector<int>& active);

enum class Stage { One, Two };

/// Component values of the six-term training loss; total is their plain
/// unweighted sum.
struct LossBreakdown {
    double embed = 0.0;
    double cls = 0.0;
    double bin_r = 0.0;
    double delta_r = 0.0;
    double bin_t = 0.0;
    double delta_t = 0.0;
    double total = 0.0;
};

/// All head outputs of the network for one sample. Also reused as the
/// gradient container (same shapes).
struct HeadOutputs {
    VecX cls_logits;
    VecX rot_bin_logits;
    MatX rot_sixd;   // N x 6
    VecX t_bin_logits;
    MatX t_deltas;   // M x 3
    EmbeddingPair embedding{VecX(), VecX()};
};

struct SampleTargets {
    int gt_class = 0;
    SoftLabelVector rot_labels;
    std::vector<int> active_bins;
    std::vector<Mat3> rot_delta_targets;  // size N, only active entries used
    int t_bin = 0;
    Vec3 t_delta = Vec3::Zero();
    EmbeddingPair gt_embedding{VecX(), VecX()};
};

struct TotalLossResult {
    LossBreakdown breakdown;
    HeadOutputs grads;
};

/// Stage I activates cls + bin_r + delta_r; Stage II all six terms.
/// Inactive terms contribute exactly 0 loss and gradient.
TotalLossResult total_loss(const HeadOutputs& outputs, const SampleTargets& targets,
                           Stage stage, double huber_delta = 1.0);

struct AdamState {
    VecX m;
    VecX v;
    long step = 0;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard bias-corrected Adam update, in place.
void adam_step(VecX& params, const VecX& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace posekit
