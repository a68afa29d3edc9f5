#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "posekit/errors.hpp"

namespace posekit {

using VecX = Eigen::VectorXd;

/// Disentangled (shape, pose) embedding. Defaults are 512 each; the toy
/// trainer uses smaller configured dims.
struct EmbeddingPair {
    VecX shape;
    VecX pose;

    EmbeddingPair() : shape(VecX::Zero(512)), pose(VecX::Zero(512)) {}
    EmbeddingPair(VecX s, VecX p) : shape(std::move(s)), pose(std::move(p)) {}
};

struct ShapeEntry {
    std::string id;
    std::string category;
    VecX embedding;
};

/// One canonical-pose shape embedding per model; retrieval consumes only
/// the shape half of a query (the pose vector is not an argument).
struct ShapeDatabase {
    std::vector<ShapeEntry> entries;

    int dim() const { return entries.empty() ? 0 : static_cast<int>(entries.front().embedding.size()); }
};

struct RetrievalResult {
    std::string shape_id;
    double distance = 0.0;
    int index = 0;
};

ShapeDatabase build_database(std::vector<ShapeEntry> entries);

/// argmin over entries of the L2 distance; ties broken by insertion order.
RetrievalResult nearest_shape(const VecX& query, const ShapeDatabase& db);

struct L1LossResult {
    double loss = 0.0;
    VecX grad_shape;
    VecX grad_pose;
};

/// Mean absolute difference over the concatenated shape+pose vectors,
/// with the subgradient sign(pred - target) / len (0 at equality).
L1LossResult l1_embedding_loss(const EmbeddingPair& pred, const EmbeddingPair& target);

nlohmann::json database_to_json(const ShapeDatabase& db);
ShapeDatabase database_from_json(const nlohmann::json& j);
void save_database(const ShapeDatabase& db, const std::string& path);
ShapeDatabase load_database(const std::string& path);

}  // namespace posekit
