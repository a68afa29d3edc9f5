#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "posekit/losses.hpp"

namespace posekit {

/// Head partition sizes for the multi-head MLP. num_t_bins = 0 disables
/// the translation heads (Stage I).
struct MlpConfig {
    int input_dim = 0;
    int hidden_dim = 64;
    int shape_dim = 32;
    int pose_dim = 32;
    int num_classes = 0;
    int num_rot_bins = 0;
    int num_t_bins = 0;

    int embedding_dim() const { return shape_dim + pose_dim; }
};

/// Two-layer MLP backbone (tanh hidden, linear embedding layer) with
/// linear heads reading designated embedding partitions: shape-class
/// logits from the shape half, rotation bin logits and per-bin 6D deltas
/// from the pose half, translation heads from the full embedding.
class MlpModel {
  public:
    MlpModel() = default;
    MlpModel(const MlpConfig& config, std::uint64_t seed);

    const MlpConfig& config() const { return config_; }
    VecX& params() { return params_; }
    const VecX& params() const { return params_; }

    /// Forward cache for a batch (rows are samples); head fields double
    /// as the gradient container in backward().
    struct Batch {
        MatX input;
        MatX hidden;
        MatX embedding;
        MatX cls_logits;
        MatX rot_bin_logits;
        MatX rot_sixd;     // B x 6N
        MatX t_bin_logits;
        MatX t_deltas;     // B x 3M
    };

    Batch forward(const MatX& input) const;

    /// Maps head-space gradients (head fields of `grads`, plus
    /// grads.embedding as a direct gradient on the embedding layer) to a
    /// flat parameter gradient.
    VecX backward(const Batch& batch, const Batch& grads) const;

    /// Slices one row of a forward batch into per-sample head outputs.
    HeadOutputs sample_outputs(const Batch& batch, int row) const;

    EmbeddingPair embed(const VecX& input) const;

    nlohmann::json to_json() const;
    static MlpModel from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static MlpModel load(const std::string& path);

  private:
    struct TensorSpec {
        long offset;
        long rows;
        long cols;
    };
    enum Tensor {
        kW1, kB1, kW2, kB2, kWc, kBc, kWr, kBr, kWd, kBd, kWt, kBt, kWtd, kBtd,
        kTensorCount
    };

    void build_layout();
    Eigen::Map<const MatX> view(int tensor) const;
    Eigen::Map<MatX> view_mut(VecX& storage, int tensor) const;

    MlpConfig config_;
    VecX params_;
    std::vector<TensorSpec> layout_;
};

}  // namespace posekit
