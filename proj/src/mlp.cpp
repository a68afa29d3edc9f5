#include "posekit/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace posekit {

void MlpModel::build_layout() {
    const MlpConfig& c = config_;
    const long e = c.embedding_dim();
    const std::vector<std::pair<long, long>> shapes = {
        {c.hidden_dim, c.input_dim},        // W1
        {c.hidden_dim, 1},                  // b1
        {e, c.hidden_dim},                  // W2
        {e, 1},                             // b2
        {c.num_classes, c.shape_dim},       // Wc
        {c.num_classes, 1},                 // bc
        {c.num_rot_bins, c.pose_dim},       // Wr
        {c.num_rot_bins, 1},                // br
        {6L * c.num_rot_bins, c.pose_dim},  // Wd
        {6L * c.num_rot_bins, 1},           // bd
        {c.num_t_bins, e},                  // Wt
        {c.num_t_bins, 1},                  // bt
        {3L * c.num_t_bins, e},             // Wtd
        {3L * c.num_t_bins, 1},             // btd
    };
    layout_.clear();
    long offset = 0;
    for (const auto& [rows, cols] : shapes) {
        layout_.push_back({offset, rows, cols});
        offset += rows * cols;
    }
    params_.resize(offset);
}

Eigen::Map<const MatX> MlpModel::view(int tensor) const {
    const TensorSpec& s = layout_[tensor];
    return {params_.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<MatX> MlpModel::view_mut(VecX& storage, int tensor) const {
    const TensorSpec& s = layout_[tensor];
    return {storage.data() + s.offset, s.rows, s.cols};
}

MlpModel::MlpModel(const MlpConfig& config, std::uint64_t seed) : config_(config) {
    if (config.input_dim < 1 || config.hidden_dim < 1 || config.shape_dim < 1 ||
        config.pose_dim < 1 || config.num_classes < 2 || config.num_rot_bins < 1 ||
        config.num_t_bins < 0)
        throw ConfigError("invalid MLP configuration");
    build_layout();
    params_.setZero();
    std::mt19937_64 rng(seed);
    for (int t = 0; t < kTensorCount; ++t) {
        const TensorSpec& s = layout_[t];
        if (s.cols == 1) continue;  // biases start at zero
        const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
        std::uniform_real_distribution<double> u(-limit, limit);
        auto w = view_mut(params_, t);
        for (long j = 0; j < s.cols; ++j)
            for (long i = 0; i < s.rows; ++i) w(i, j) = u(rng);
    }
}

MlpModel::Batch MlpModel::forward(const MatX& input) const {
    if (input.cols() != config_.input_dim)
        throw ShapeMismatch("forward: input dimension mismatch");
    Batch b;
    b.input = input;
    b.hidden = ((input * view(kW1).transpose()).rowwise() +
                view(kB1).col(0).transpose()).array().tanh();
    b.embedding = (b.hidden * view(kW2).transpose()).rowwise() +
                  view(kB2).col(0).transpose();
    const auto shape_part = b.embedding.leftCols(config_.shape_dim);
    const auto pose_part = b.embedding.rightCols(config_.pose_dim);
    b.cls_logits = (shape_part * view(kWc).transpose()).rowwise() +
                   view(kBc).col(0).transpose();
    b.rot_bin_logits = (pose_part * view(kWr).transpose()).rowwise() +
                       view(kBr).col(0).transpose();
    b.rot_sixd = (pose_part * view(kWd).transpose()).rowwise() +
                 view(kBd).col(0).transpose();
    if (config_.num_t_bins > 0) {
        b.t_bin_logits = (b.embedding * view(kWt).transpose()).rowwise() +
                         view(kBt).col(0).transpose();
        b.t_deltas = (b.embedding * view(kWtd).transpose()).rowwise() +
                     view(kBtd).col(0).transpose();
    }
    return b;
}

VecX MlpModel::backward(const Batch& batch, const Batch& grads) const {
    VecX grad = VecX::Zero(params_.size());
    const auto shape_part = batch.embedding.leftCols(config_.shape_dim);
    const auto pose_part = batch.embedding.rightCols(config_.pose_dim);

    MatX d_embedding = MatX::Zero(batch.embedding.rows(), batch.embedding.cols());
    if (grads.embedding.size() > 0) d_embedding = grads.embedding;

    view_mut(grad, kWc) = grads.cls_logits.transpose() * shape_part;
    view_mut(grad, kBc).col(0) = grads.cls_logits.colwise().sum();
    d_embedding.leftCols(config_.shape_dim) += grads.cls_logits * view(kWc);

    view_mut(grad, kWr) = grads.rot_bin_logits.transpose() * pose_part;
    view_mut(grad, kBr).col(0) = grads.rot_bin_logits.colwise().sum();
    d_embedding.rightCols(config_.pose_dim) += grads.rot_bin_logits * view(kWr);

    view_mut(grad, kWd) = grads.rot_sixd.transpose() * pose_part;
    view_mut(grad, kBd).col(0) = grads.rot_sixd.colwise().sum();
    d_embedding.rightCols(config_.pose_dim) += grads.rot_sixd * view(kWd);

    if (config_.num_t_bins > 0) {
        view_mut(grad, kWt) = grads.t_bin_logits.transpose() * batch.embedding;
        view_mut(grad, kBt).col(0) = grads.t_bin_logits.colwise().sum();
        d_embedding += grads.t_bin_logits * view(kWt);

        view_mut(grad, kWtd) = grads.t_deltas.transpose() * batch.embedding;
        view_mut(grad, kBtd).col(0) = grads.t_deltas.colwise().sum();
        d_embedding += grads.t_deltas * view(kWtd);
    }

    view_mut(grad, kW2) = d_embedding.transpose() * batch.hidden;
    view_mut(grad, kB2).col(0) = d_embedding.colwise().sum();
    const MatX d_hidden = d_embedding * view(kW2);
    const MatX d_pre = d_hidden.array() * (1.0 - batch.hidden.array().square());
    view_mut(grad, kW1) = d_pre.transpose() * batch.input;
    view_mut(grad, kB1).col(0) = d_pre.colwise().sum();
    return grad;
}

HeadOutputs MlpModel::sample_outputs(const Batch& batch, int row) const {
    HeadOutputs out;
    out.cls_logits = batch.cls_logits.row(row).transpose();
    out.rot_bin_logits = batch.rot_bin_logits.row(row).transpose();
    out.rot_sixd = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 6,
                                                  Eigen::RowMajor>>(
        batch.rot_sixd.row(row).eval().data(), config_.num_rot_bins, 6);
    if (config_.num_t_bins > 0) {
        out.t_bin_logits = batch.t_bin_logits.row(row).transpose();
        out.t_deltas = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3,
                                                      Eigen::RowMajor>>(
            batch.t_deltas.row(row).eval().data(), config_.num_t_bins, 3);
    }
    out.embedding.shape = batch.embedding.row(row).head(config_.shape_dim).transpose();
    out.embedding.pose = batch.embedding.row(row).tail(config_.pose_dim).transpose();
    return out;
}

EmbeddingPair MlpModel::embed(const VecX& input) const {
    const Batch b = forward(input.transpose());
    return {b.embedding.row(0).head(config_.shape_dim).transpose(),
            b.embedding.row(0).tail(config_.pose_dim).transpose()};
}

nlohmann::json MlpModel::to_json() const {
    nlohmann::json j;
    j["config"] = {{"input_dim", config_.input_dim},
                   {"hidden_dim", config_.hidden_dim},
                   {"shape_dim", config_.shape_dim},
                   {"pose_dim", config_.pose_dim},
                   {"num_classes", config_.num_classes},
                   {"num_rot_bins", config_.num_rot_bins},
                   {"num_t_bins", config_.num_t_bins}};
    j["params"] = std::vector<double>(params_.data(), params_.data() + params_.size());
    return j;
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
    MlpModel model;
    try {
        const auto& c = j.at("config");
        model.config_.input_dim = c.at("input_dim").get<int>();
        model.config_.hidden_dim = c.at("hidden_dim").get<int>();
        model.config_.shape_dim = c.at("shape_dim").get<int>();
        model.config_.pose_dim = c.at("pose_dim").get<int>();
        model.config_.num_classes = c.at("num_classes").get<int>();
        model.config_.num_rot_bins = c.at("num_rot_bins").get<int>();
        model.config_.num_t_bins = c.at("num_t_bins").get<int>();
        model.build_layout();
        const auto& params = j.at("params");
        if (static_cast<long>(params.size()) != model.params_.size())
            throw ParseError("checkpoint parameter count mismatch");
        for (long i = 0; i < model.params_.size(); ++i)
            model.params_[i] = params[i].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad model checkpoint JSON: ") + e.what());
    }
    return model;
}

void MlpModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << to_json().dump() << "\n";
}

MlpModel MlpModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON in ") + path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace posekit
