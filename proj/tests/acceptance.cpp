// Acceptance suite: one pass/fail line per criterion, exit 0 only when
// every criterion holds. Tolerances are pinned here, not configurable.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "posekit/embedding.hpp"
#include "posekit/losses.hpp"
#include "posekit/metrics.hpp"
#include "posekit/rotation.hpp"
#include "posekit/so3_grid.hpp"
#include "posekit/train.hpp"
#include "posekit/translation.hpp"
#include "posekit/voxel.hpp"

using namespace posekit;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
    int id;
    const char* name;
    bool (*run)(std::string& detail);
    double budget_s;
};

std::mt19937_64 fd_rng(2024);

VecX random_vec(int n, double scale) {
    std::normal_distribution<double> gauss(0.0, scale);
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(fd_rng);
    return v;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

template <typename F>
bool fd_matches(F&& loss_at, VecX& x, const VecX& analytic, double tol) {
    const double h = 1e-5;
    for (int i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double hi = loss_at();
        x[i] = orig - h;
        const double lo = loss_at();
        x[i] = orig;
        if (rel_err(analytic[i], (hi - lo) / (2 * h)) >= tol) return false;
    }
    return true;
}

// --- 1: bin spacing ---------------------------------------------------------
bool check_spacing(std::string& detail) {
    const RotationBinTable t = generate_bin_table(32, 7);
    const double deg = t.spacing * 180.0 / pi;
    detail = "n=32 spacing " + std::to_string(deg) + " deg";
    return deg > 47.0 && deg < 67.0;
}

// --- 2: codec roundtrip -----------------------------------------------------
bool check_roundtrip(std::string& detail) {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int n : {1, 8, 32, 72, 576}) {
        const RotationBinTable t = generate_bin_table(n, 7);
        for (int i = 0; i < 10000; ++i) {
            const Mat3 r = random_rotation(rng);
            worst = std::max(worst, (decode_pose(encode_pose(r, t), t) - r).norm());
        }
    }
    detail = "worst residual " + std::to_string(worst);
    return worst < 1e-9;
}

// --- 3: monotone covering ---------------------------------------------------
bool check_covering(std::string& detail) {
    double prev = pi + 1.0;
    detail = "covering radii (deg):";
    for (int n : {8, 32, 72, 576}) {
        const double c = generate_bin_table(n, 7).covering_radius;
        detail += " " + std::to_string(c * 180.0 / pi);
        if (c >= prev) return false;
        prev = c;
    }
    return true;
}

// --- 4: gradient suite ------------------------------------------------------
bool check_gradients(std::string& detail) {
    for (int trial = 0; trial < 100; ++trial) {
        {
            VecX logits = random_vec(8, 2.0);
            SoftLabelVector labels;
            labels.y.assign(8, 0.0);
            labels.y[trial % 8] = 1.0;
            labels.y[(trial + 3) % 8] = 0.1;
            const ScalarGrad r = soft_bce_loss(logits, labels);
            if (!fd_matches([&] { return soft_bce_loss(logits, labels).loss; },
                            logits, r.grad, 1e-4)) {
                detail = "soft_bce mismatch";
                return false;
            }
        }
        {
            VecX logits = random_vec(6, 2.0);
            const ScalarGrad r = cross_entropy_loss(logits, trial % 6);
            if (!fd_matches([&] { return cross_entropy_loss(logits, trial % 6).loss; },
                            logits, r.grad, 1e-4)) {
                detail = "cross_entropy mismatch";
                return false;
            }
        }
        {
            VecX pred = random_vec(3, 1.5);
            const Vec3 target = Vec3(random_vec(3, 1.0));
            bool kink = false;
            for (int i = 0; i < 3; ++i)
                if (std::abs(std::abs(pred[i] - target[i]) - 1.0) < 1e-3) kink = true;
            if (!kink) {
                const HuberGrad r = huber_loss(Vec3(pred), target, 1.0);
                VecX grad(3);
                grad << r.grad[0], r.grad[1], r.grad[2];
                if (!fd_matches([&] { return huber_loss(Vec3(pred), target, 1.0).loss; },
                                pred, grad, 1e-4)) {
                    detail = "huber mismatch";
                    return false;
                }
            }
        }
        {
            const Mat3 target = random_rotation(fd_rng);
            VecX pred = random_vec(6, 1.0);
            if (pred.head<3>().norm() < 0.3) pred[0] += 1.0;
            Vec6 grad;
            double theta;
            try {
                theta = sixd_geodesic(Vec6(pred), target, &grad);
            } catch (const DegenerateSixD&) {
                continue;
            }
            if (theta < 0.05 || theta > pi - 0.05) continue;
            if (!fd_matches([&] { return sixd_geodesic(Vec6(pred), target, nullptr); },
                            pred, VecX(grad), 1e-4)) {
                detail = "delta_geodesic mismatch";
                return false;
            }
        }
        {
            const int d = 8;
            VecX ps = random_vec(d, 1.0);
            const EmbeddingPair target{random_vec(d, 1.0), random_vec(d, 1.0)};
            const EmbeddingPair pred{ps, VecX::Zero(d)};
            const L1LossResult r = l1_embedding_loss(pred, target);
            bool kink = false;
            for (int i = 0; i < d; ++i)
                if (std::abs(ps[i] - target.shape[i]) < 1e-3) kink = true;
            if (!kink &&
                !fd_matches(
                    [&] {
                        return l1_embedding_loss({ps, VecX::Zero(d)}, target).loss;
                    },
                    ps, r.grad_shape, 1e-4)) {
                detail = "l1_embedding mismatch";
                return false;
            }
        }
    }
    detail = "5 losses x 100 points, rel err < 1e-4";
    return true;
}

// --- 5: soft labels ---------------------------------------------------------
bool check_soft_labels(std::string& detail) {
    const RotationBinTable t = generate_bin_table(32, 7);
    std::mt19937_64 rng(102);
    const double alpha = 0.1, beta = t.spacing;
    for (int trial = 0; trial < 1000; ++trial) {
        const Mat3 r = random_rotation(rng);
        const SoftLabelVector labels = soft_labels(r, t, alpha, beta);
        int nearest = 0;
        double best = geodesic_distance(r, t.bins[0]);
        for (int i = 1; i < t.n(); ++i) {
            const double d = geodesic_distance(r, t.bins[i]);
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        for (int i = 0; i < t.n(); ++i) {
            double expected = geodesic_distance(t.bins[i], r) < beta ? alpha : 0.0;
            if (i == nearest) expected = 1.0;
            if (labels.y[i] != expected) {
                detail = "mismatch at trial " + std::to_string(trial);
                return false;
            }
        }
    }
    detail = "1000 ground truths, n=32, exact match";
    return true;
}

// --- 6: binvox --------------------------------------------------------------
bool check_binvox(std::string& detail) {
    auto fixture = [](std::initializer_list<std::pair<int, int>> runs) {
        std::string s = "#binvox 1\ndim 2 2 2\ntranslate 0 0 0\nscale 1\ndata\n";
        for (const auto& [v, c] : runs) {
            s.push_back(static_cast<char>(v));
            s.push_back(static_cast<char>(c));
        }
        return s;
    };
    if (read_binvox(fixture({{0, 8}})).occupied_count() != 0 ||
        read_binvox(fixture({{1, 8}})).occupied_count() != 8) {
        detail = "hand-encoded fixture mismatch";
        return false;
    }
    std::mt19937_64 rng(103);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 100; ++trial) {
        OccupancyGrid g(32);
        for (auto& v : g.data) v = coin(rng) ? 1 : 0;
        const std::string bytes = write_binvox(g);
        if (!(read_binvox(bytes) == g) || write_binvox(read_binvox(bytes)) != bytes) {
            detail = "roundtrip mismatch";
            return false;
        }
    }
    detail = "fixtures + 100 random 32^3 roundtrips";
    return true;
}

// --- 7: voxel geometry ------------------------------------------------------
bool check_voxel_geometry(std::string& detail) {
    ShapeParams params;
    params.subdivisions = 3;
    const OccupancyGrid sphere =
        voxelize_mesh(make_synthetic_shape(ShapeKind::Ellipsoid, params, 0), 32);
    const double fraction = double(sphere.occupied_count()) / (30.0 * 30.0 * 30.0);
    const double target = pi / 6.0;
    detail = "sphere fraction " + std::to_string(fraction) + " vs " +
             std::to_string(target);
    if (std::abs(fraction - target) / target > 0.05) return false;

    std::mt19937_64 rng(104);
    std::bernoulli_distribution coin(0.3);
    OccupancyGrid g(16);
    for (auto& v : g.data) v = coin(rng) ? 1 : 0;
    const OccupancyGrid rz = rotate_grid(g, rotate_z(pi / 2));
    const OccupancyGrid rx = rotate_grid(g, rotate_x(pi / 2));
    for (int z = 0; z < 16; ++z)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                // Inverse-map oracles for quarter turns about z and x.
                if (rz.at(x, y, z) != g.at(y, 15 - x, z)) return false;
                if (rx.at(x, y, z) != g.at(x, z, 15 - y)) return false;
            }
    return true;
}

// --- 8: retrieval -----------------------------------------------------------
bool check_retrieval(std::string& detail) {
    std::mt19937_64 rng(105);
    std::normal_distribution<double> gauss;
    std::vector<ShapeEntry> entries;
    for (int i = 0; i < 1000; ++i) {
        VecX v(512);
        for (int d = 0; d < 512; ++d) v[d] = gauss(rng);
        entries.push_back({"s" + std::to_string(i), "c", v});
    }
    // Exact duplicate of entry 0 at index 500: ties must resolve to 0.
    entries[500].embedding = entries[0].embedding;
    const ShapeDatabase db = build_database(entries);
    for (int q = 0; q < 100; ++q) {
        VecX query(512);
        for (int d = 0; d < 512; ++d) query[d] = gauss(rng);
        if (q == 0) query = db.entries[0].embedding;  // exact tie case
        const RetrievalResult got = nearest_shape(query, db);
        int best = 0;
        double best_d = (db.entries[0].embedding - query).norm();
        for (int i = 1; i < 1000; ++i) {
            const double d = (db.entries[i].embedding - query).norm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (got.index != best || rel_err(got.distance, best_d) > 1e-9) {
            detail = "oracle mismatch at query " + std::to_string(q);
            return false;
        }
    }
    detail = "1000 entries x 100 queries incl. tie";
    return true;
}

// --- 9: metrics -------------------------------------------------------------
bool check_metrics(std::string& detail) {
    auto rec = [](const std::string& id, double deg, bool occ = false,
                  bool trunc = false, double area = 1.0) {
        PredictionRecord r;
        r.instance_id = id;
        r.pred_rotation = rotate_z(deg * pi / 180.0);
        r.pred_shape_id = "x";
        r.gt_shape_id = deg < 25 ? "x" : "y";
        r.occluded = occ;
        r.truncated = trunc;
        r.bbox_area = area;
        return r;
    };
    std::vector<PredictionRecord> records = {
        rec("a", 10, false, false, 1), rec("b", 20, false, false, 2),
        rec("c", 40, false, false, 3), rec("d", 30.0 * (1 + 1e-9), false, false, 4),
        rec("e", 70, true, false, 5),  rec("f", 80, false, true, 6)};
    if (std::abs(med_err(records) - 25.0) > 1e-6) {
        detail = "med_err";
        return false;
    }
    if (std::abs(acc_pi6(records) - 0.5) > 1e-12) {
        detail = "acc_pi6 strict boundary";
        return false;
    }
    if (std::abs(top1_acc(records) - 0.5) > 1e-12) {
        detail = "top1_acc";
        return false;
    }
    const BucketedReport report = bucketed_report(records);
    auto bucket = [&](const std::string& name) -> const BucketMetrics* {
        for (const auto& b : report.buckets)
            if (b.name == name) return &b;
        return nullptr;
    };
    const auto *def = bucket("Default"), *small = bucket("Small"),
               *large = bucket("Large"), *occ = bucket("Occluded"),
               *trunc = bucket("Truncated");
    if (!def || !small || !large || !occ || !trunc) {
        detail = "missing bucket";
        return false;
    }
    const bool ok = def->count == 4 && small->count == 1 && large->count == 1 &&
                    std::abs(small->med_err - 10.0) < 1e-6 &&
                    std::abs(large->med_err - 30.0) < 1e-3 &&
                    occ->count == 1 && std::abs(occ->med_err - 70.0) < 1e-6 &&
                    trunc->count == 1 && std::abs(trunc->med_err - 80.0) < 1e-6;
    detail = "fixtures incl. strict boundary + bucket filters";
    return ok;
}

// --- 10/11: end-to-end + determinism ----------------------------------------
struct EndToEnd {
    Stage1Result stage1;
    Stage2Result stage2;
    std::string csv;
};

EndToEnd run_end_to_end(std::uint64_t seed) {
    Stage1Config c1;  // defaults: 8 shapes, 8 bins
    EndToEnd r{train_stage1(c1, seed), {}, {}};
    Stage2Config c2;
    r.stage2 = train_stage2(c2, r.stage1, seed);
    std::vector<LossBreakdown> both = r.stage1.trajectory;
    both.insert(both.end(), r.stage2.trajectory.begin(), r.stage2.trajectory.end());
    r.csv = trajectory_to_csv(both);
    return r;
}

bool check_end_to_end(const EndToEnd& r, std::string& detail) {
    const double covering_deg = r.stage1.bin_table.covering_radius * 180.0 / pi;
    const double cube_diag = r.stage2.t_table.cube_dims.norm();
    const ProbeResult probe = disentanglement_probe(r.stage1, 200, 314);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "top1 %.3f (>=0.5), mederr %.1f deg (< %.1f), terr %.3f (< %.3f), "
                  "probe pose %.2f / retrieval %.2f (>=0.8)",
                  r.stage2.top1_accuracy, r.stage2.med_err_deg, covering_deg,
                  r.stage2.mean_translation_error, cube_diag, probe.pose_stability,
                  probe.retrieval_stability);
    detail = buf;
    return r.stage2.top1_accuracy >= 0.5 && r.stage2.med_err_deg < covering_deg &&
           r.stage2.mean_translation_error < cube_diag &&
           probe.pose_stability >= 0.8 && probe.retrieval_stability >= 0.8;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, bool ok, double seconds,
                      double budget, const std::string& detail) {
        const bool in_budget = seconds < budget;
        if (!(ok && in_budget)) ++failures;
        std::printf("[%s] criterion %2d: %-18s (%.2fs / %.0fs) %s%s\n",
                    ok && in_budget ? "PASS" : "FAIL", id, name, seconds, budget,
                    detail.c_str(), in_budget ? "" : " [over time budget]");
        std::fflush(stdout);
    };
    auto timed = [&](int id, const char* name, double budget, auto&& fn) {
        std::string detail;
        const auto start = Clock::now();
        bool ok = false;
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(Clock::now() - start).count();
        report(id, name, ok, seconds, budget, detail);
    };

    timed(1, "bin spacing", 5, check_spacing);
    timed(2, "codec roundtrip", 10, check_roundtrip);
    timed(3, "monotone covering", 30, check_covering);
    timed(4, "gradient suite", 30, check_gradients);
    timed(5, "soft labels", 5, check_soft_labels);
    timed(6, "binvox", 5, check_binvox);
    timed(7, "voxel geometry", 10, check_voxel_geometry);
    timed(8, "retrieval", 5, check_retrieval);
    timed(9, "metrics", 1, check_metrics);

    // Criteria 10 and 11 share the training runs: run twice with one seed.
    {
        std::string detail;
        const auto start = Clock::now();
        EndToEnd first, second;
        bool ok10 = false, ok11 = false;
        double t_first = 0.0;
        try {
            first = run_end_to_end(7);
            t_first = std::chrono::duration<double>(Clock::now() - start).count();
            ok10 = check_end_to_end(first, detail);
            second = run_end_to_end(7);
            ok11 = second.csv == first.csv;
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        report(10, "end-to-end", ok10, t_first, 600, detail);
        const double t_total =
            std::chrono::duration<double>(Clock::now() - start).count();
        report(11, "determinism", ok11, t_total, 1800,
               ok11 ? "loss CSV bit-identical across reruns"
                    : "loss CSV differs between reruns");
    }

    if (failures == 0) std::printf("acceptance: all 11 criteria passed\n");
    else std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
