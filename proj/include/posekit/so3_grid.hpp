#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "posekit/rotation.hpp"

namespace posekit {

/// Ordered set of rotations {R_i} discretizing SO(3).
struct RotationBinTable {
    std::vector<Mat3> bins;
    std::uint64_t seed = 0;
    /// Minimum pairwise geodesic distance, radians.
    double spacing = 0.0;
    /// Max distance from a Haar-random rotation to its nearest bin,
    /// Monte-Carlo estimate recorded at generation (reproducible from seed).
    double covering_radius = 0.0;

    int n() const { return static_cast<int>(bins.size()); }
};

/// Per-bin soft classification targets: one entry equals 1 (the nearest
/// bin), entries within the beta neighborhood get alpha, the rest 0.
struct SoftLabelVector {
    std::vector<double> y;
};

/// Bin index plus residual rotation; decode reproduces the encoded
/// rotation exactly.
struct PoseCode {
    int bin_index = 0;
    Mat3 delta = Mat3::Identity();
};

/// Largest supported grid: the twice-refined Hopf grid.
inline constexpr int kMaxBinCount = 4608;

/// Uniform SO(3) grid. Exact Hopf-fibration grids at n = 72 (12-cell S²
/// base x 6 circle divisions), 576 and 4608 (successive 8-fold
/// refinements); any other n is farthest-point subsampled from the next
/// finer Hopf grid under geodesic distance, greedily seeded from the
/// identity. n = 1 is exactly the identity. spacing and covering_radius
/// are filled in from the given seed.
RotationBinTable generate_bin_table(int n, std::uint64_t seed);

/// Raw Hopf grid of 12*4^level S² cells x 6*2^level circle divisions.
std::vector<Mat3> hopf_grid(int level);

/// argmin_i GD(r, R_i); ties broken by lowest index.
int nearest_bin(const Mat3& r, const RotationBinTable& table);

/// Soft labels with nearest-bin override: the nearest bin always gets 1
/// even when GD never hits 0 exactly.
SoftLabelVector soft_labels(const Mat3& r_gt, const RotationBinTable& table,
                            double alpha, double beta);

/// bin_index = nearest bin, delta = R̂ * r.
PoseCode encode_pose(const Mat3& r, const RotationBinTable& table);

/// R = R̂ᵀ * delta; exact inverse of encode_pose.
Mat3 decode_pose(const PoseCode& code, const RotationBinTable& table);

// JSON persistence: {n, seed, spacing, covering_radius, bins:[[9 floats]...]}.
nlohmann::json bin_table_to_json(const RotationBinTable& table);
RotationBinTable bin_table_from_json(const nlohmann::json& j);
void save_bin_table(const RotationBinTable& table, const std::string& path);
RotationBinTable load_bin_table(const std::string& path);

}  // namespace posekit
