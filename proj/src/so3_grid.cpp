#include "posekit/so3_grid.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

namespace posekit {

namespace {

constexpr double kPi = std::numbers::pi;

// HEALPix ring-scheme pixel center (z = cos(theta), phi) for pixel p of
// 12*nside^2. Polar-cap formulas only engage for nside >= 2.
void healpix_center(int nside, int p, double& z, double& phi) {
    const int npix = 12 * nside * nside;
    const int ncap = 2 * nside * (nside - 1);
    if (p < ncap) {
        const double ph = (p + 1) / 2.0;
        const int ring = static_cast<int>(std::sqrt(ph - std::sqrt(std::floor(ph)))) + 1;
        const int j = p + 1 - 2 * ring * (ring - 1);
        z = 1.0 - static_cast<double>(ring) * ring / (3.0 * nside * nside);
        phi = kPi / (2.0 * ring) * (j - 0.5);
    } else if (p < npix - ncap) {
        const int pp = p - ncap;
        const int ring = pp / (4 * nside) + nside;
        const int j = pp % (4 * nside) + 1;
        const int stagger = (ring - nside + 1) % 2;
        z = 4.0 / 3.0 - 2.0 * ring / (3.0 * nside);
        phi = kPi / (2.0 * nside) * (j - stagger / 2.0);
    } else {
        const int pm = npix - 1 - p;
        const double ph = (pm + 1) / 2.0;
        const int ring = static_cast<int>(std::sqrt(ph - std::sqrt(std::floor(ph)))) + 1;
        const int j = pm + 1 - 2 * ring * (ring - 1);
        z = -(1.0 - static_cast<double>(ring) * ring / (3.0 * nside * nside));
        phi = 2.0 * kPi - kPi / (2.0 * ring) * (j - 0.5);
    }
}

// Hopf coordinates (theta, phi on S2; psi on the fiber) -> quaternion.
UnitQuaternion hopf_quaternion(double theta, double phi, double psi) {
    UnitQuaternion q;
    q.w = std::cos(theta / 2.0) * std::cos(psi / 2.0);
    q.x = std::cos(theta / 2.0) * std::sin(psi / 2.0);
    q.y = std::sin(theta / 2.0) * std::cos(phi + psi / 2.0);
    q.z = std::sin(theta / 2.0) * std::sin(phi + psi / 2.0);
    return q;
}

double min_distance_to(const std::vector<Mat3>& set, const Mat3& r) {
    double best = std::numeric_limits<double>::infinity();
    for (const Mat3& s : set) best = std::min(best, geodesic_distance(s, r));
    return best;
}

double pairwise_spacing(const std::vector<Mat3>& bins) {
    if (bins.size() < 2) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < bins.size(); ++i)
        for (size_t j = i + 1; j < bins.size(); ++j)
            best = std::min(best, geodesic_distance(bins[i], bins[j]));
    return best;
}

double monte_carlo_covering_radius(const std::vector<Mat3>& bins,
                                   std::uint64_t seed, int samples = 100000) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Mat3 r = random_rotation(rng);
        worst = std::max(worst, min_distance_to(bins, r));
    }
    return worst;
}

// Greedy farthest-point subsample of `candidates`, seeded from the
// identity rotation (which becomes bin 0).
std::vector<Mat3> farthest_point_subsample(const std::vector<Mat3>& candidates,
                                           int n) {
    std::vector<Mat3> selected;
    selected.reserve(n);
    selected.push_back(Mat3::Identity());
    std::vector<double> dist(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i)
        dist[i] = geodesic_distance(candidates[i], selected[0]);
    while (static_cast<int>(selected.size()) < n) {
        size_t best = 0;
        for (size_t i = 1; i < candidates.size(); ++i)
            if (dist[i] > dist[best]) best = i;
        selected.push_back(candidates[best]);
        for (size_t i = 0; i < candidates.size(); ++i)
            dist[i] = std::min(dist[i], geodesic_distance(candidates[i], selected.back()));
    }
    return selected;
}

}  // namespace

std::vector<Mat3> hopf_grid(int level) {
    const int nside = 1 << level;
    const int npix = 12 * nside * nside;
    const int psi_divisions = 6 << level;
    std::vector<Mat3> bins;
    bins.reserve(static_cast<size_t>(npix) * psi_divisions);
    for (int p = 0; p < npix; ++p) {
        double z = 0.0, phi = 0.0;
        healpix_center(nside, p, z, phi);
        const double theta = std::acos(std::clamp(z, -1.0, 1.0));
        for (int k = 0; k < psi_divisions; ++k) {
            const double psi = 2.0 * kPi * k / psi_divisions;
            bins.push_back(quat_to_rotation(hopf_quaternion(theta, phi, psi)));
        }
    }
    return bins;
}

RotationBinTable generate_bin_table(int n, std::uint64_t seed) {
    if (n < 1 || n > kMaxBinCount)
        throw InvalidBinCount("bin count must be in [1, " +
                              std::to_string(kMaxBinCount) + "], got " +
                              std::to_string(n));
    RotationBinTable table;
    table.seed = seed;
    if (n == 1) {
        table.bins = {Mat3::Identity()};
    } else if (n == 72) {
        table.bins = hopf_grid(0);
    } else if (n == 576) {
        table.bins = hopf_grid(1);
    } else if (n == 4608) {
        table.bins = hopf_grid(2);
    } else {
        table.bins = farthest_point_subsample(hopf_grid(n <= 576 ? 1 : 2), n);
    }
    table.spacing = pairwise_spacing(table.bins);
    table.covering_radius = monte_carlo_covering_radius(table.bins, seed);
    return table;
}

int nearest_bin(const Mat3& r, const RotationBinTable& table) {
    if (table.bins.empty()) throw InvalidBinCount("empty bin table");
    int best = 0;
    double best_dist = geodesic_distance(r, table.bins[0]);
    for (int i = 1; i < table.n(); ++i) {
        const double d = geodesic_distance(r, table.bins[i]);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

SoftLabelVector soft_labels(const Mat3& r_gt, const RotationBinTable& table,
                            double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParams("alpha must be in (0,1)");
    if (!(beta > 0.0)) throw InvalidParams("beta must be positive");
    SoftLabelVector labels;
    labels.y.assign(table.n(), 0.0);
    for (int i = 0; i < table.n(); ++i)
        if (geodesic_distance(table.bins[i], r_gt) < beta) labels.y[i] = alpha;
    labels.y[nearest_bin(r_gt, table)] = 1.0;
    return labels;
}

PoseCode encode_pose(const Mat3& r, const RotationBinTable& table) {
    PoseCode code;
    code.bin_index = nearest_bin(r, table);
    code.delta = table.bins[code.bin_index] * r;
    return code;
}

Mat3 decode_pose(const PoseCode& code, const RotationBinTable& table) {
    if (code.bin_index < 0 || code.bin_index >= table.n())
        throw BinIndexOutOfRange("bin index " + std::to_string(code.bin_index) +
                                 " out of range for table of size " +
                                 std::to_string(table.n()));
    return table.bins[code.bin_index].transpose() * code.delta;
}

nlohmann::json bin_table_to_json(const RotationBinTable& table) {
    nlohmann::json j;
    j["n"] = table.n();
    j["seed"] = table.seed;
    j["spacing"] = table.spacing;
    j["covering_radius"] = table.covering_radius;
    j["bins"] = nlohmann::json::array();
    for (const Mat3& r : table.bins) j["bins"].push_back(rotation_to_json(r));
    return j;
}

RotationBinTable bin_table_from_json(const nlohmann::json& j) {
    RotationBinTable table;
    try {
        table.seed = j.at("seed").get<std::uint64_t>();
        table.spacing = j.at("spacing").get<double>();
        table.covering_radius = j.at("covering_radius").get<double>();
        for (const auto& b : j.at("bins")) table.bins.push_back(rotation_from_json(b));
        if (j.at("n").get<int>() != table.n())
            throw ParseError("bin table n field disagrees with bins array");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad bin table JSON: ") + e.what());
    }
    return table;
}

void save_bin_table(const RotationBinTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << bin_table_to_json(table).dump(2) << "\n";
}

RotationBinTable load_bin_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON in ") + path + ": " + e.what());
    }
    return bin_table_from_json(j);
}

}  // namespace posekit
