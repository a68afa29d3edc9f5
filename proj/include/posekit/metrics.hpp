#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "posekit/rotation.hpp"

namespace posekit {

struct PredictionRecord {
    std::string instance_id;
    Mat3 pred_rotation = Mat3::Identity();
    Mat3 gt_rotation = Mat3::Identity();
    std::string pred_shape_id;
    std::string gt_shape_id;
    double bbox_area = 0.0;  // pixels^2
    bool occluded = false;
    bool truncated = false;
    std::string category;
};

/// Median geodesic pose error in degrees; even counts average the middle
/// pair.
double med_err(const std::vector<PredictionRecord>& records);

/// Fraction with geodesic error strictly below pi/6.
double acc_pi6(const std::vector<PredictionRecord>& records);

/// Fraction with pred_shape_id == gt_shape_id.
double top1_acc(const std::vector<PredictionRecord>& records);

struct BucketMetrics {
    std::string name;
    int count = 0;
    double med_err = 0.0;
    double acc_pi6 = 0.0;
    double top1_acc = 0.0;
};

struct BucketedReport {
    /// Default (non-occluded, non-truncated), Small/Large (bottom/top
    /// third by bbox_area among the Default set), Occluded, Truncated.
    std::vector<BucketMetrics> buckets;
    std::vector<std::string> warnings;
    std::map<std::string, BucketMetrics> per_category;
};

BucketedReport bucketed_report(const std::vector<PredictionRecord>& records,
                               bool per_category = false);

// JSON-lines persistence, one record per line.
nlohmann::json record_to_json(const PredictionRecord& record);
PredictionRecord record_from_json(const nlohmann::json& j);
std::vector<PredictionRecord> load_records_jsonl(const std::string& path);
void save_records_jsonl(const std::vector<PredictionRecord>& records,
                        const std::string& path);
nlohmann::json report_to_json(const BucketedReport& report);

}  // namespace posekit
