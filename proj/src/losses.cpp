#include "posekit/losses.hpp"

#include <cmath>

namespace posekit {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

ScalarGrad soft_bce_loss(const VecX& logits, const SoftLabelVector& labels) {
    const int n = static_cast<int>(logits.size());
    if (n != static_cast<int>(labels.y.size()))
        throw DimensionMismatch("soft_bce_loss: logits/labels size mismatch");
    ScalarGrad result;
    result.grad.resize(n);
    for (int i = 0; i < n; ++i) {
        const double z = logits[i], y = labels.y[i];
        // -[y log x + (1-y) log(1-x)] = softplus(z) - y z  for x = sigmoid(z)
        result.loss += softplus(z) - y * z;
        result.grad[i] = (sigmoid(z) - y) / n;
    }
    result.loss /= n;
    return result;
}

ScalarGrad cross_entropy_loss(const VecX& logits, int gt_class) {
    const int c = static_cast<int>(logits.size());
    if (c < 2) throw DimensionMismatch("cross_entropy_loss needs >= 2 classes");
    if (gt_class < 0 || gt_class >= c)
        throw ClassOutOfRange("class " + std::to_string(gt_class) +
                              " out of range for " + std::to_string(c) + " logits");
    const double max = logits.maxCoeff();
    const VecX shifted = logits.array() - max;
    const double lse = std::log(shifted.array().exp().sum());
    ScalarGrad result;
    result.loss = lse - shifted[gt_class];
    result.grad = (shifted.array() - lse).exp();
    result.grad[gt_class] -= 1.0;
    return result;
}

HuberGrad huber_loss(const Vec3& pred, const Vec3& target, double delta) {
    if (delta <= 0.0) throw InvalidParams("huber delta must be positive");
    HuberGrad result;
    for (int a = 0; a < 3; ++a) {
        const double r = pred[a] - target[a];
        if (std::abs(r) <= delta) {
            result.loss += 0.5 * r * r;
            result.grad[a] = r;
        } else {
            result.loss += delta * (std::abs(r) - 0.5 * delta);
            result.grad[a] = delta * (r > 0 ? 1.0 : -1.0);
        }
    }
    result.loss /= 3.0;
    result.grad /= 3.0;
    return result;
}

double sixd_geodesic(const Vec6& pred, const Mat3& target, Vec6* grad) {
    const Vec3 a1 = pred.head<3>();
    const Vec3 a2 = pred.tail<3>();
    constexpr double eps = 1e-8;
    const double n1 = a1.norm();
    if (n1 <= eps) throw DegenerateSixD("sixd_geodesic: ‖a1‖ too small");
    const Vec3 b1 = a1 / n1;
    const Vec3 u = a2 - b1.dot(a2) * b1;
    const double n2 = u.norm();
    if (n2 <= eps) throw DegenerateSixD("sixd_geodesic: a2 parallel to a1");
    const Vec3 b2 = u / n2;
    const Vec3 b3 = b1.cross(b2);

    const double trace = b1.dot(target.col(0)) + b2.dot(target.col(1)) +
                         b3.dot(target.col(2));
    constexpr double clamp = 1.0 - 1e-7;
    const double c_raw = (trace - 1.0) / 2.0;
    const double c = std::clamp(c_raw, -clamp, clamp);
    const double theta = std::acos(c);
    if (grad == nullptr) return theta;

    // d theta / d trace; zero inside the clamped shells.
    double dtheta_dc = 0.0;
    if (c_raw > -clamp && c_raw < clamp)
        dtheta_dc = -1.0 / std::sqrt(1.0 - c * c);
    const double k = dtheta_dc / 2.0;
    Vec3 g_b1 = k * target.col(0);
    Vec3 g_b2 = k * target.col(1);
    const Vec3 g_b3 = k * target.col(2);

    // b3 = b1 x b2
    g_b1 += b2.cross(g_b3);
    g_b2 += g_b3.cross(b1);
    // b2 = u / ‖u‖
    const Vec3 g_u = (g_b2 - b2 * b2.dot(g_b2)) / n2;
    // u = a2 - (b1·a2) b1
    const Vec3 g_a2 = g_u - b1 * b1.dot(g_u);
    g_b1 += -(b1.dot(a2) * g_u + g_u.dot(b1) * a2);
    // b1 = a1 / ‖a1‖
    const Vec3 g_a1 = (g_b1 - b1 * b1.dot(g_b1)) / n1;

    grad->head<3>() = g_a1;
    grad->tail<3>() = g_a2;
    return theta;
}

DeltaGeodesicGrad delta_geodesic_loss(const MatX& pred_sixd,
                                      const std::vector<Mat3>& targets,
                                      const std::vector<int>& active) {
    const int n = static_cast<int>(pred_sixd.rows());
    if (pred_sixd.cols() != 6)
        throw DimensionMismatch("delta_geodesic_loss: predictions must be N x 6");
    if (static_cast<int>(targets.size()) != n)
        throw DimensionMismatch("delta_geodesic_loss: targets size mismatch");
    if (active.empty()) throw InvalidParams("delta_geodesic_loss: empty active set");
    DeltaGeodesicGrad result;
    result.grad = MatX::Zero(n, 6);
    for (int i : active) {
        if (i < 0 || i >= n) throw BinIndexOutOfRange("active bin out of range");
        Vec6 g;
        const Vec6 pred = pred_sixd.row(i).transpose();
        result.loss += sixd_geodesic(pred, targets[i], &g);
        result.grad.row(i) = g.transpose() / n;
    }
    result.loss /= n;
    return result;
}

TotalLossResult total_loss(const HeadOutputs& outputs, const SampleTargets& targets,
                           Stage stage, double huber_delta) {
    TotalLossResult result;
    auto& g = result.grads;
    g.cls_logits = VecX::Zero(outputs.cls_logits.size());
    g.rot_bin_logits = VecX::Zero(outputs.rot_bin_logits.size());
    g.rot_sixd = MatX::Zero(outputs.rot_sixd.rows(), outputs.rot_sixd.cols());
    g.t_bin_logits = VecX::Zero(outputs.t_bin_logits.size());
    g.t_deltas = MatX::Zero(outputs.t_deltas.rows(), outputs.t_deltas.cols());
    g.embedding = EmbeddingPair(VecX::Zero(outputs.embedding.shape.size()),
                                VecX::Zero(outputs.embedding.pose.size()));

    {
        const ScalarGrad cls = cross_entropy_loss(outputs.cls_logits, targets.gt_class);
        result.breakdown.cls = cls.loss;
        g.cls_logits = cls.grad;
    }
    {
        const ScalarGrad bin_r = soft_bce_loss(outputs.rot_bin_logits, targets.rot_labels);
        result.breakdown.bin_r = bin_r.loss;
        g.rot_bin_logits = bin_r.grad;
    }
    {
        const DeltaGeodesicGrad delta_r = delta_geodesic_loss(
            outputs.rot_sixd, targets.rot_delta_targets, targets.active_bins);
        result.breakdown.delta_r = delta_r.loss;
        g.rot_sixd = delta_r.grad;
    }
    if (stage == Stage::Two) {
        const L1LossResult embed =
            l1_embedding_loss(outputs.embedding, targets.gt_embedding);
        result.breakdown.embed = embed.loss;
        g.embedding.shape = embed.grad_shape;
        g.embedding.pose = embed.grad_pose;

        const ScalarGrad bin_t = cross_entropy_loss(outputs.t_bin_logits, targets.t_bin);
        result.breakdown.bin_t = bin_t.loss;
        g.t_bin_logits = bin_t.grad;

        const Vec3 pred_delta = outputs.t_deltas.row(targets.t_bin).transpose();
        const HuberGrad delta_t = huber_loss(pred_delta, targets.t_delta, huber_delta);
        result.breakdown.delta_t = delta_t.loss;
        g.t_deltas.row(targets.t_bin) = delta_t.grad.transpose();
    }
    result.breakdown.total = result.breakdown.embed + result.breakdown.cls +
                             result.breakdown.bin_r + result.breakdown.delta_r +
                             result.breakdown.bin_t + result.breakdown.delta_t;
    return result;
}

void adam_step(VecX& params, const VecX& grads, AdamState& state,
               const AdamConfig& config) {
    if (params.size() != grads.size())
        throw ShapeMismatch("adam_step: params/grads size mismatch");
    if (state.step == 0) {
        state.m = VecX::Zero(params.size());
        state.v = VecX::Zero(params.size());
    }
    if (state.m.size() != params.size())
        throw ShapeMismatch("adam_step: state size mismatch");
    ++state.step;
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
    state.v = config.beta2 * state.v.array().matrix() +
              (1.0 - config.beta2) * grads.array().square().matrix();
    const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    const Eigen::ArrayXd m_hat = state.m.array() / bias1;
    const Eigen::ArrayXd v_hat = state.v.array() / bias2;
    params.array() -= config.lr * m_hat / (v_hat.sqrt() + config.eps);
}

}  // namespace posekit
