#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "posekit/so3_grid.hpp"

using namespace posekit;
using std::numbers::pi;

namespace {

int scan_nearest(const Mat3& r, const RotationBinTable& t) {
    int best = 0;
    double best_d = geodesic_distance(r, t.bins[0]);
    for (int i = 1; i < t.n(); ++i) {
        const double d = geodesic_distance(r, t.bins[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("n=1 table is the identity") {
    const RotationBinTable t = generate_bin_table(1, 7);
    REQUIRE(t.n() == 1);
    CHECK((t.bins[0] - Mat3::Identity()).norm() < 1e-12);
    // Pure regression regime: delta is the rotation itself.
    std::mt19937_64 rng(1);
    const Mat3 r = random_rotation(rng);
    const PoseCode c = encode_pose(r, t);
    CHECK(c.bin_index == 0);
    CHECK((c.delta - r).norm() < 1e-12);
    CHECK((decode_pose(c, t) - r).norm() < 1e-12);
}

TEST_CASE("bin count validation") {
    CHECK_THROWS_AS(generate_bin_table(0, 7), InvalidBinCount);
    CHECK_THROWS_AS(generate_bin_table(4609, 7), InvalidBinCount);
}

TEST_CASE("hopf grid cardinalities and distinctness") {
    CHECK(int(hopf_grid(0).size()) == 72);
    CHECK(int(hopf_grid(1).size()) == 576);
    const RotationBinTable t = generate_bin_table(72, 7);
    REQUIRE(t.n() == 72);
    CHECK(t.spacing > 0.0);
    for (const Mat3& b : t.bins) CHECK(is_rotation(b, 1e-9));
    // Pairwise distinct at the recorded spacing.
    double min_d = pi;
    for (int i = 0; i < 72; ++i)
        for (int j = i + 1; j < 72; ++j)
            min_d = std::min(min_d, geodesic_distance(t.bins[i], t.bins[j]));
    CHECK(min_d == doctest::Approx(t.spacing).epsilon(1e-9));
}

TEST_CASE("n=32 spacing matches the coarse-grid claim") {
    const RotationBinTable t = generate_bin_table(32, 7);
    const double deg = t.spacing * 180.0 / pi;
    CHECK(deg > 47.0);
    CHECK(deg < 67.0);
}

TEST_CASE("nearest_bin equals exhaustive scan") {
    const RotationBinTable t = generate_bin_table(32, 7);
    for (int k = 0; k < t.n(); ++k) CHECK(nearest_bin(t.bins[k], t) == k);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const Mat3 r = random_rotation(rng);
        CHECK(nearest_bin(r, t) == scan_nearest(r, t));
    }
    // Small perturbation keeps the bin.
    const Mat3 r = t.bins[5] * rotate_z(1e-3);
    CHECK(nearest_bin(r, t) == 5);
}

TEST_CASE("soft labels match an exhaustive evaluation") {
    const RotationBinTable t = generate_bin_table(8, 7);
    std::mt19937_64 rng(3);
    const double alpha = 0.1;
    const double beta = t.spacing;
    for (int i = 0; i < 200; ++i) {
        const Mat3 r = random_rotation(rng);
        const SoftLabelVector labels = soft_labels(r, t, alpha, beta);
        REQUIRE(int(labels.y.size()) == t.n());
        const int nb = scan_nearest(r, t);
        int ones = 0;
        for (int k = 0; k < t.n(); ++k) {
            double expected = geodesic_distance(t.bins[k], r) < beta ? alpha : 0.0;
            if (k == nb) expected = 1.0;
            CHECK(labels.y[k] == expected);
            if (labels.y[k] == 1.0) ++ones;
        }
        CHECK(ones == 1);
    }
}

TEST_CASE("soft label one-hot when beta excludes neighbors") {
    const RotationBinTable t = generate_bin_table(32, 7);
    const SoftLabelVector labels = soft_labels(t.bins[4], t, 0.1, t.spacing * 0.5);
    for (int k = 0; k < t.n(); ++k) CHECK(labels.y[k] == (k == 4 ? 1.0 : 0.0));
    // Wider beta activates neighbors at alpha.
    const SoftLabelVector wide = soft_labels(t.bins[4], t, 0.1, t.spacing * 1.2);
    int alphas = 0;
    for (int k = 0; k < t.n(); ++k)
        if (wide.y[k] == 0.1) ++alphas;
    CHECK(alphas >= 1);
}

TEST_CASE("encode/decode roundtrip") {
    std::mt19937_64 rng(4);
    for (int n : {1, 8, 32, 72}) {
        const RotationBinTable t = generate_bin_table(n, 7);
        for (int i = 0; i < 300; ++i) {
            const Mat3 r = random_rotation(rng);
            const PoseCode c = encode_pose(r, t);
            CHECK(c.bin_index >= 0);
            CHECK(c.bin_index < n);
            CHECK(is_rotation(c.delta, 1e-9));
            CHECK((decode_pose(c, t) - r).norm() < 1e-9);
        }
        // Encoding a bin member roundtrips through its own bin, and
        // decode(k, bins[k]) = I per R = R_hat^T * R_d.
        const PoseCode self = encode_pose(t.bins[0], t);
        CHECK(self.bin_index == 0);
        CHECK((decode_pose(self, t) - t.bins[0]).norm() < 1e-9);
        CHECK((decode_pose({0, t.bins[0]}, t) - Mat3::Identity()).norm() < 1e-9);
    }
}

TEST_CASE("decode rejects bad bin index") {
    const RotationBinTable t = generate_bin_table(8, 7);
    CHECK_THROWS_AS(decode_pose({8, Mat3::Identity()}, t), BinIndexOutOfRange);
    CHECK_THROWS_AS(decode_pose({-1, Mat3::Identity()}, t), BinIndexOutOfRange);
}

TEST_CASE("encoded rotation stays within the covering radius of its bin") {
    const RotationBinTable t = generate_bin_table(72, 7);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = random_rotation(rng);
        const PoseCode c = encode_pose(r, t);
        // delta is the algebraic residual R_hat * r; the covering bound
        // applies to the rotation's distance from its assigned bin.
        CHECK((c.delta - t.bins[c.bin_index] * r).norm() < 1e-12);
        CHECK(geodesic_distance(r, t.bins[c.bin_index]) <= t.covering_radius + 1e-6);
    }
}

TEST_CASE("covering radius decreases with bin count") {
    const double c8 = generate_bin_table(8, 7).covering_radius;
    const double c72 = generate_bin_table(72, 7).covering_radius;
    const double c576 = generate_bin_table(576, 7).covering_radius;
    CHECK(c576 < c72);
    CHECK(c72 < c8);
}

TEST_CASE("bin table json persistence") {
    const RotationBinTable t = generate_bin_table(8, 7);
    const std::string path = (std::filesystem::temp_directory_path() / "bins8.json").string();
    save_bin_table(t, path);
    const RotationBinTable t2 = load_bin_table(path);
    {
        std::ofstream bad(path + ".bad");
        bad << "not json";
    }
    REQUIRE(t2.n() == t.n());
    CHECK(t2.seed == t.seed);
    CHECK(t2.spacing == doctest::Approx(t.spacing).epsilon(1e-15));
    CHECK(t2.covering_radius == doctest::Approx(t.covering_radius).epsilon(1e-15));
    for (int i = 0; i < t.n(); ++i) CHECK((t2.bins[i] - t.bins[i]).norm() < 1e-15);
    CHECK_THROWS_AS(load_bin_table(path + ".bad"), ParseError);
    std::filesystem::remove(path + ".bad");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_bin_table("/nonexistent/bins.json"), Error);
}

TEST_CASE("same seed reproduces the table") {
    const RotationBinTable a = generate_bin_table(32, 7);
    const RotationBinTable b = generate_bin_table(32, 7);
    for (int i = 0; i < 32; ++i) CHECK((a.bins[i] - b.bins[i]).norm() == 0.0);
    CHECK(a.covering_radius == b.covering_radius);
}
