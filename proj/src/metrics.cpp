#include "posekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

namespace posekit {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<PredictionRecord> exclude_flagged(const std::vector<PredictionRecord>& records) {
    std::vector<PredictionRecord> kept;
    for (const auto& r : records)
        if (!r.occluded && !r.truncated) kept.push_back(r);
    return kept;
}

double raw_med_err(const std::vector<PredictionRecord>& records) {
    std::vector<double> errors;
    errors.reserve(records.size());
    for (const auto& r : records)
        errors.push_back(geodesic_distance(r.pred_rotation, r.gt_rotation) * kRadToDeg);
    std::sort(errors.begin(), errors.end());
    const size_t n = errors.size();
    if (n % 2 == 1) return errors[n / 2];
    return 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
}

double raw_acc_pi6(const std::vector<PredictionRecord>& records) {
    size_t hits = 0;
    for (const auto& r : records)
        if (geodesic_distance(r.pred_rotation, r.gt_rotation) < std::numbers::pi / 6.0)
            ++hits;
    return static_cast<double>(hits) / records.size();
}

double raw_top1(const std::vector<PredictionRecord>& records) {
    size_t hits = 0;
    for (const auto& r : records)
        if (r.pred_shape_id == r.gt_shape_id) ++hits;
    return static_cast<double>(hits) / records.size();
}

BucketMetrics bucket_metrics(const std::string& name,
                             const std::vector<PredictionRecord>& records) {
    BucketMetrics m;
    m.name = name;
    m.count = static_cast<int>(records.size());
    m.med_err = raw_med_err(records);
    m.acc_pi6 = raw_acc_pi6(records);
    m.top1_acc = raw_top1(records);
    return m;
}

}  // namespace

double med_err(const std::vector<PredictionRecord>& records) {
    const auto kept = exclude_flagged(records);
    if (kept.empty()) throw EmptyAfterFilter("no records after exclusion filter");
    return raw_med_err(kept);
}

double acc_pi6(const std::vector<PredictionRecord>& records) {
    const auto kept = exclude_flagged(records);
    if (kept.empty()) throw EmptyAfterFilter("no records after exclusion filter");
    return raw_acc_pi6(kept);
}

double top1_acc(const std::vector<PredictionRecord>& records) {
    const auto kept = exclude_flagged(records);
    if (kept.empty()) throw EmptyAfterFilter("no records after exclusion filter");
    return raw_top1(kept);
}

BucketedReport bucketed_report(const std::vector<PredictionRecord>& records,
                               bool per_category) {
    if (records.size() < 3)
        throw InvalidParams("bucketed_report needs at least 3 records");
    BucketedReport report;
    auto add_bucket = [&](const std::string& name,
                          const std::vector<PredictionRecord>& members) {
        if (members.empty()) {
            report.warnings.push_back("bucket '" + name + "' is empty, omitted");
            return;
        }
        report.buckets.push_back(bucket_metrics(name, members));
    };

    const std::vector<PredictionRecord> kept = exclude_flagged(records);
    add_bucket("Default", kept);

    // Size thirds over the filtered set; ties resolved by instance_id.
    std::vector<PredictionRecord> by_size = kept;
    std::sort(by_size.begin(), by_size.end(),
              [](const PredictionRecord& a, const PredictionRecord& b) {
                  if (a.bbox_area != b.bbox_area) return a.bbox_area < b.bbox_area;
                  return a.instance_id < b.instance_id;
              });
    const size_t third = by_size.size() / 3;
    add_bucket("Small", {by_size.begin(), by_size.begin() + third});
    add_bucket("Large", {by_size.end() - third, by_size.end()});

    std::vector<PredictionRecord> occluded, truncated;
    for (const auto& r : records) {
        if (r.occluded) occluded.push_back(r);
        if (r.truncated) truncated.push_back(r);
    }
    add_bucket("Occluded", occluded);
    add_bucket("Truncated", truncated);

    if (per_category) {
        std::map<std::string, std::vector<PredictionRecord>> groups;
        for (const auto& r : kept) groups[r.category].push_back(r);
        for (const auto& [category, members] : groups)
            report.per_category[category] = bucket_metrics(category, members);
    }
    return report;
}

nlohmann::json record_to_json(const PredictionRecord& r) {
    return {{"instance_id", r.instance_id},
            {"pred_rotation", rotation_to_json(r.pred_rotation)},
            {"gt_rotation", rotation_to_json(r.gt_rotation)},
            {"pred_shape_id", r.pred_shape_id},
            {"gt_shape_id", r.gt_shape_id},
            {"bbox_area", r.bbox_area},
            {"occluded", r.occluded},
            {"truncated", r.truncated},
            {"category", r.category}};
}

PredictionRecord record_from_json(const nlohmann::json& j) {
    PredictionRecord r;
    try {
        r.instance_id = j.at("instance_id").get<std::string>();
        r.pred_rotation = rotation_from_json(j.at("pred_rotation"));
        r.gt_rotation = rotation_from_json(j.at("gt_rotation"));
        r.pred_shape_id = j.at("pred_shape_id").get<std::string>();
        r.gt_shape_id = j.at("gt_shape_id").get<std::string>();
        r.bbox_area = j.at("bbox_area").get<double>();
        r.occluded = j.at("occluded").get<bool>();
        r.truncated = j.at("truncated").get<bool>();
        r.category = j.value("category", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad prediction record: ") + e.what());
    }
    return r;
}

std::vector<PredictionRecord> load_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<PredictionRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void save_records_jsonl(const std::vector<PredictionRecord>& records,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

nlohmann::json report_to_json(const BucketedReport& report) {
    nlohmann::json j;
    j["buckets"] = nlohmann::json::array();
    for (const auto& b : report.buckets)
        j["buckets"].push_back({{"name", b.name},
                                {"count", b.count},
                                {"med_err", b.med_err},
                                {"acc_pi6", b.acc_pi6},
                                {"top1_acc", b.top1_acc}});
    j["warnings"] = report.warnings;
    if (!report.per_category.empty()) {
        j["per_category"] = nlohmann::json::object();
        for (const auto& [category, b] : report.per_category)
            j["per_category"][category] = {{"count", b.count},
                                           {"med_err", b.med_err},
                                           {"acc_pi6", b.acc_pi6},
                                           {"top1_acc", b.top1_acc}};
    }
    return j;
}

}  // namespace posekit
