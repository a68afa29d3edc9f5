#include "posekit/embedding.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace posekit {

ShapeDatabase build_database(std::vector<ShapeEntry> entries) {
    std::set<std::string> seen;
    const int dim = entries.empty() ? 0 : static_cast<int>(entries.front().embedding.size());
    for (const ShapeEntry& e : entries) {
        if (!seen.insert(e.id).second)
            throw DuplicateId("duplicate shape id '" + e.id + "'");
        if (static_cast<int>(e.embedding.size()) != dim)
            throw DimensionMismatch("inconsistent embedding dimension in database");
    }
    ShapeDatabase db;
    db.entries = std::move(entries);
    return db;
}

RetrievalResult nearest_shape(const VecX& query, const ShapeDatabase& db) {
    if (db.entries.empty()) throw EmptyDatabase("nearest_shape on empty database");
    if (query.size() != db.entries.front().embedding.size())
        throw DimensionMismatch("query dimension " + std::to_string(query.size()) +
                                " != database dimension " +
                                std::to_string(db.entries.front().embedding.size()));
    RetrievalResult best;
    best.index = 0;
    best.distance = (db.entries[0].embedding - query).norm();
    for (int i = 1; i < static_cast<int>(db.entries.size()); ++i) {
        const double d = (db.entries[i].embedding - query).norm();
        if (d < best.distance) {
            best.distance = d;
            best.index = i;
        }
    }
    best.shape_id = db.entries[best.index].id;
    return best;
}

L1LossResult l1_embedding_loss(const EmbeddingPair& pred, const EmbeddingPair& target) {
    if (pred.shape.size() != target.shape.size() ||
        pred.pose.size() != target.pose.size())
        throw DimensionMismatch("embedding pair dimensions differ");
    const double len = static_cast<double>(pred.shape.size() + pred.pose.size());
    L1LossResult result;
    result.loss = ((pred.shape - target.shape).cwiseAbs().sum() +
                   (pred.pose - target.pose).cwiseAbs().sum()) / len;
    auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    result.grad_shape = (pred.shape - target.shape).unaryExpr(sign) / len;
    result.grad_pose = (pred.pose - target.pose).unaryExpr(sign) / len;
    return result;
}

nlohmann::json database_to_json(const ShapeDatabase& db) {
    nlohmann::json j;
    j["dim"] = db.dim();
    j["entries"] = nlohmann::json::array();
    for (const ShapeEntry& e : db.entries) {
        nlohmann::json vec = nlohmann::json::array();
        for (int i = 0; i < e.embedding.size(); ++i) vec.push_back(e.embedding[i]);
        j["entries"].push_back({{"id", e.id}, {"category", e.category}, {"vec", vec}});
    }
    return j;
}

ShapeDatabase database_from_json(const nlohmann::json& j) {
    std::vector<ShapeEntry> entries;
    try {
        const int dim = j.at("dim").get<int>();
        for (const auto& je : j.at("entries")) {
            ShapeEntry e;
            e.id = je.at("id").get<std::string>();
            e.category = je.at("category").get<std::string>();
            const auto& vec = je.at("vec");
            if (static_cast<int>(vec.size()) != dim)
                throw DimensionMismatch("entry dimension disagrees with dim field");
            e.embedding.resize(dim);
            for (int i = 0; i < dim; ++i) e.embedding[i] = vec[i].get<double>();
            entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad shape database JSON: ") + e.what());
    }
    return build_database(std::move(entries));
}

void save_database(const ShapeDatabase& db, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << database_to_json(db).dump(2) << "\n";
}

ShapeDatabase load_database(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON in ") + path + ": " + e.what());
    }
    return database_from_json(j);
}

}  // namespace posekit
