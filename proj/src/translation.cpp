#include "posekit/translation.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace posekit {

Vec3 TranslationBinTable::cube_min(int bin_index) const {
    const int nx = divisions[0], ny = divisions[1];
    const int ix = bin_index % nx;
    const int iy = (bin_index / nx) % ny;
    const int iz = bin_index / (nx * ny);
    return range_min + Vec3(ix * cube_dims.x(), iy * cube_dims.y(), iz * cube_dims.z());
}

TranslationBinTable generate_translation_bins(const Vec3& range_min,
                                              const Vec3& range_max,
                                              const std::array<int, 3>& divisions) {
    for (int a = 0; a < 3; ++a) {
        if (!(range_max[a] > range_min[a]))
            throw InvalidRange("translation range max must exceed min on every axis");
        if (divisions[a] < 1) throw InvalidRange("divisions must be >= 1");
    }
    TranslationBinTable table;
    table.range_min = range_min;
    table.range_max = range_max;
    table.divisions = divisions;
    for (int a = 0; a < 3; ++a)
        table.cube_dims[a] = (range_max[a] - range_min[a]) / divisions[a];
    table.centers.reserve(static_cast<size_t>(divisions[0]) * divisions[1] * divisions[2]);
    for (int iz = 0; iz < divisions[2]; ++iz)
        for (int iy = 0; iy < divisions[1]; ++iy)
            for (int ix = 0; ix < divisions[0]; ++ix)
                table.centers.push_back(range_min +
                                        Vec3((ix + 0.5) * table.cube_dims.x(),
                                             (iy + 0.5) * table.cube_dims.y(),
                                             (iz + 0.5) * table.cube_dims.z()));
    return table;
}

TranslationBinTable default_translation_bins() {
    return generate_translation_bins({-0.25, -0.25, 0.5}, {1.5, 1.5, 10.0}, {4, 4, 8});
}

EncodedTranslation encode_translation(const Vec3& t, const TranslationBinTable& table) {
    EncodedTranslation result;
    Vec3 clamped = t;
    for (int a = 0; a < 3; ++a) {
        if (clamped[a] < table.range_min[a]) {
            clamped[a] = table.range_min[a];
            result.out_of_range = true;
        } else if (clamped[a] > table.range_max[a]) {
            clamped[a] = table.range_max[a];
            result.out_of_range = true;
        }
    }
    // Half-open cubes [lo, hi); the last cube on each axis is closed so the
    // range max still maps inside.
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
        const double u = (clamped[a] - table.range_min[a]) / table.cube_dims[a];
        idx[a] = std::min(static_cast<int>(std::floor(u)), table.divisions[a] - 1);
    }
    result.code.bin_index =
        idx[0] + table.divisions[0] * (idx[1] + table.divisions[1] * idx[2]);
    const Vec3 lo = table.cube_min(result.code.bin_index);
    result.code.delta = (clamped - lo).cwiseQuotient(table.cube_dims);
    return result;
}

Vec3 decode_translation(const TranslationCode& code, const TranslationBinTable& table) {
    if (code.bin_index < 0 || code.bin_index >= table.n())
        throw BinIndexOutOfRange("translation bin index out of range");
    return table.cube_min(code.bin_index) + code.delta.cwiseProduct(table.cube_dims);
}

nlohmann::json translation_table_to_json(const TranslationBinTable& table) {
    nlohmann::json j;
    j["range_min"] = {table.range_min.x(), table.range_min.y(), table.range_min.z()};
    j["range_max"] = {table.range_max.x(), table.range_max.y(), table.range_max.z()};
    j["divisions"] = table.divisions;
    return j;
}

TranslationBinTable translation_table_from_json(const nlohmann::json& j) {
    try {
        const auto lo = j.at("range_min");
        const auto hi = j.at("range_max");
        const auto div = j.at("divisions").get<std::array<int, 3>>();
        return generate_translation_bins(
            {lo[0].get<double>(), lo[1].get<double>(), lo[2].get<double>()},
            {hi[0].get<double>(), hi[1].get<double>(), hi[2].get<double>()}, div);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad translation table JSON: ") + e.what());
    }
}

void save_translation_table(const TranslationBinTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << translation_table_to_json(table).dump(2) << "\n";
}

TranslationBinTable load_translation_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON in ") + path + ": " + e.what());
    }
    return translation_table_from_json(j);
}

}  // namespace posekit
