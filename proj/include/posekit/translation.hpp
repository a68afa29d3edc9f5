#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "posekit/rotation.hpp"

namespace posekit {

/// Axis-aligned cube binning of the up-to-scale translation space.
/// Defaults follow the training ranges x,y in [-0.25, 1.5], z in [0.5, 10].
struct TranslationBinTable {
    Vec3 range_min{-0.25, -0.25, 0.5};
    Vec3 range_max{1.5, 1.5, 10.0};
    std::array<int, 3> divisions{4, 4, 8};
    Vec3 cube_dims = Vec3::Zero();
    /// Cube centers (t_bin), x-fastest ordering.
    std::vector<Vec3> centers;

    int n() const { return static_cast<int>(centers.size()); }
    Vec3 cube_min(int bin_index) const;
};

/// Cube index plus residual normalized by the cube dimensions to [0,1]^3.
struct TranslationCode {
    int bin_index = 0;
    Vec3 delta = Vec3::Zero();
};

struct EncodedTranslation {
    TranslationCode code;
    /// Set when the input was outside the table ranges and got clamped.
    bool out_of_range = false;
};

TranslationBinTable generate_translation_bins(const Vec3& range_min,
                                              const Vec3& range_max,
                                              const std::array<int, 3>& divisions);
TranslationBinTable default_translation_bins();

/// Cubes are half-open [lo, hi) per axis, so a shared face belongs to
/// the cube starting there; the last cube on each axis is closed.
EncodedTranslation encode_translation(const Vec3& t, const TranslationBinTable& table);

Vec3 decode_translation(const TranslationCode& code, const TranslationBinTable& table);

nlohmann::json translation_table_to_json(const TranslationBinTable& table);
TranslationBinTable translation_table_from_json(const nlohmann::json& j);
void save_translation_table(const TranslationBinTable& table, const std::string& path);
TranslationBinTable load_translation_table(const std::string& path);

}  // namespace posekit
