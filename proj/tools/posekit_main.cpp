// posekit command-line tool: wires the library modules into small,
// reproducible pipelines. JSON for artifacts, JSON-lines for record
// streams, CSV for loss trajectories.
//
// Exit codes: 0 success, 1 usage error, 2 data/runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posekit/embedding.hpp"
#include "posekit/losses.hpp"
#include "posekit/metrics.hpp"
#include "posekit/mlp.hpp"
#include "posekit/rotation.hpp"
#include "posekit/so3_grid.hpp"
#include "posekit/train.hpp"
#include "posekit/translation.hpp"
#include "posekit/voxel.hpp"

namespace {

using nlohmann::json;
using namespace posekit;

constexpr const char* kToolVersion = "1.0.0";

std::uint64_t env_seed() {
    if (const char* s = std::getenv("POSEKIT_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError("POSEKIT_SEED is not an integer");
        }
    }
    return 0;
}

// FNV-1a over the canonical (sorted-key) JSON dump of the run config.
std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : dump) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

json metadata_block(std::uint64_t seed, const json& config) {
    return {{"tool_version", kToolVersion},
            {"seed", seed},
            {"config_hash", config_hash(config)}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
}

Mat3 euler_deg_to_rotation(double azimuth, double elevation, double inplane) {
    constexpr double d2r = 3.14159265358979323846 / 180.0;
    return euler_to_rotation({azimuth * d2r, elevation * d2r, inplane * d2r});
}

// ---- subcommand payloads -------------------------------------------------

int cmd_gen_bins(int n, std::uint64_t seed, const std::string& out) {
    const RotationBinTable table = generate_bin_table(n, seed);
    json j = bin_table_to_json(table);
    j["metadata"] = metadata_block(seed, {{"n", n}, {"seed", seed}});
    write_json_file(out, j);
    std::cout << "wrote " << out << ": " << table.n() << " bins, spacing "
              << table.spacing << " rad, covering radius "
              << table.covering_radius << " rad\n";
    return 0;
}

int cmd_gen_tbins(const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::vector<int>& div, std::uint64_t seed,
                  const std::string& out) {
    const TranslationBinTable table = generate_translation_bins(
        Vec3(lo[0], lo[1], lo[2]), Vec3(hi[0], hi[1], hi[2]),
        {div[0], div[1], div[2]});
    json j = translation_table_to_json(table);
    j["metadata"] =
        metadata_block(seed, {{"min", lo}, {"max", hi}, {"divisions", div}});
    write_json_file(out, j);
    std::cout << "wrote " << out << ": " << table.n() << " cubes of ("
              << table.cube_dims.transpose() << ")\n";
    return 0;
}

int cmd_voxelize(const std::string& mesh_path, int resolution,
                 std::uint64_t seed, const std::string& out) {
    const TriangleMesh mesh = load_obj(mesh_path);
    const OccupancyGrid grid = voxelize_mesh(mesh, resolution);
    write_text_file(out, write_binvox(grid));
    const json config = {{"mesh", mesh_path}, {"resolution", resolution}};
    write_json_file(out + ".meta.json",
                    {{"metadata", metadata_block(seed, config)},
                     {"occupied", grid.occupied_count()},
                     {"resolution", grid.resolution}});
    std::cout << "wrote " << out << ": " << grid.occupied_count() << "/"
              << grid.data.size() << " voxels occupied\n";
    return 0;
}

int cmd_rotate_voxel(const std::string& in, double azimuth, double elevation,
                     double inplane, std::uint64_t seed, const std::string& out) {
    const OccupancyGrid grid = load_binvox(in);
    const Mat3 r = euler_deg_to_rotation(azimuth, elevation, inplane);
    const OccupancyGrid rotated = rotate_grid(grid, r);
    write_text_file(out, write_binvox(rotated));
    const json config = {{"in", in},
                         {"azimuth", azimuth},
                         {"elevation", elevation},
                         {"inplane", inplane}};
    write_json_file(out + ".meta.json",
                    {{"metadata", metadata_block(seed, config)},
                     {"rotation", rotation_to_json(r)},
                     {"occupied", rotated.occupied_count()}});
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_encode_pose(const std::string& bins_path, double azimuth,
                    double elevation, double inplane,
                    const std::string& rotation_path, std::uint64_t seed,
                    const std::string& out) {
    const RotationBinTable table = load_bin_table(bins_path);
    const Mat3 r = rotation_path.empty()
                       ? euler_deg_to_rotation(azimuth, elevation, inplane)
                       : rotation_from_json(load_json_file(rotation_path));
    const PoseCode code = encode_pose(r, table);
    const json config = {{"bins", bins_path}};
    const json j = {{"metadata", metadata_block(seed, config)},
                    {"bin_index", code.bin_index},
                    {"delta", rotation_to_json(code.delta)},
                    {"rotation", rotation_to_json(r)}};
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(out, j);
    return 0;
}

int cmd_decode_pose(const std::string& bins_path, const std::string& code_path,
                    std::uint64_t seed, const std::string& out) {
    const RotationBinTable table = load_bin_table(bins_path);
    const json cj = load_json_file(code_path);
    PoseCode code;
    try {
        code.bin_index = cj.at("bin_index").get<int>();
        code.delta = rotation_from_json(cj.at("delta"));
    } catch (const json::exception& e) {
        throw ParseError(code_path + ": " + e.what());
    }
    const Mat3 r = decode_pose(code, table);
    const json j = {{"metadata",
                     metadata_block(seed, {{"bins", bins_path}, {"code", code_path}})},
                    {"rotation", rotation_to_json(r)}};
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(out, j);
    return 0;
}

int cmd_build_db(const std::string& entries_path, std::uint64_t seed,
                 const std::string& out) {
    const json ej = load_json_file(entries_path);
    std::vector<ShapeEntry> entries;
    try {
        for (const json& e : ej.at("entries")) {
            ShapeEntry entry;
            entry.id = e.at("id").get<std::string>();
            entry.category = e.value("category", std::string());
            const auto vals = e.at("embedding").get<std::vector<double>>();
            entry.embedding = Eigen::Map<const VecX>(vals.data(),
                                                     static_cast<long>(vals.size()));
            entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw ParseError(entries_path + ": " + e.what());
    }
    const ShapeDatabase db = build_database(std::move(entries));
    json j = database_to_json(db);
    j["metadata"] = metadata_block(seed, {{"entries", entries_path}});
    write_json_file(out, j);
    std::cout << "wrote " << out << ": " << db.entries.size() << " entries, dim "
              << db.dim() << "\n";
    return 0;
}

int cmd_retrieve(const std::string& db_path, const std::string& query_path,
                 std::uint64_t seed, const std::string& out) {
    const ShapeDatabase db = load_database(db_path);
    const json qj = load_json_file(query_path);
    std::vector<double> vals;
    try {
        vals = (qj.is_array() ? qj : qj.at("embedding")).get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ParseError(query_path + ": " + e.what());
    }
    const VecX query =
        Eigen::Map<const VecX>(vals.data(), static_cast<long>(vals.size()));
    const RetrievalResult r = nearest_shape(query, db);
    const json j = {{"metadata",
                     metadata_block(seed, {{"db", db_path}, {"query", query_path}})},
                    {"shape_id", r.shape_id},
                    {"distance", r.distance},
                    {"index", r.index}};
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(out, j);
    return 0;
}

int cmd_train_toy(int stage, const std::string& config_path, std::uint64_t seed,
                  const std::string& out_dir) {
    json config = json::object();
    if (!config_path.empty()) config = load_json_file(config_path);
    seed = config.value("seed", seed);  // config file overrides flags
    const Stage1Config c1 = stage1_config_from_json(config.value("stage1", json::object()));
    std::filesystem::create_directories(out_dir);

    const Stage1Result s1 = train_stage1(c1, seed);
    std::string csv = trajectory_to_csv(s1.trajectory);
    s1.model.save(out_dir + "/stage1_model.json");
    save_database(s1.database, out_dir + "/database.json");
    save_bin_table(s1.bin_table, out_dir + "/bins.json");

    json run = {{"metadata", metadata_block(seed, config)},
                {"stage", stage},
                {"stage1", {{"epochs", c1.epochs},
                            {"final_loss", s1.trajectory.back().total},
                            {"heldout_class_accuracy", s1.heldout_class_accuracy}}}};

    if (stage == 2) {
        const Stage2Config c2 =
            stage2_config_from_json(config.value("stage2", json::object()));
        const Stage2Result s2 = train_stage2(c2, s1, seed);
        // One CSV for the full run: stage-2 epochs continue the numbering.
        std::istringstream s2csv(trajectory_to_csv(s2.trajectory));
        std::string line;
        std::getline(s2csv, line);  // drop the duplicate header
        std::ostringstream merged;
        merged << csv;
        int epoch = static_cast<int>(s1.trajectory.size());
        while (std::getline(s2csv, line)) {
            merged << epoch++ << line.substr(line.find(',')) << "\n";
        }
        csv = merged.str();
        s2.model.save(out_dir + "/stage2_model.json");
        save_translation_table(s2.t_table, out_dir + "/tbins.json");
        save_records_jsonl(s2.heldout_records, out_dir + "/heldout.jsonl");
        run["stage2"] = {{"epochs", c2.epochs},
                         {"final_loss", s2.trajectory.back().total},
                         {"top1_accuracy", s2.top1_accuracy},
                         {"med_err_deg", s2.med_err_deg},
                         {"mean_translation_error", s2.mean_translation_error}};
    }

    write_text_file(out_dir + "/trajectory.csv", csv);
    write_json_file(out_dir + "/run.json", run);
    std::cout << "wrote " << out_dir << "/trajectory.csv and run.json\n";
    return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& report_path,
                 bool per_category, std::uint64_t seed) {
    const std::vector<PredictionRecord> records = load_records_jsonl(pred_path);
    const BucketedReport report = bucketed_report(records, per_category);
    json j = report_to_json(report);
    j["metadata"] = metadata_block(
        seed, {{"pred", pred_path}, {"per_category", per_category}});
    write_json_file(report_path, j);
    std::cout << "wrote " << report_path << " (" << records.size()
              << " records)\n";
    return 0;
}

// Quick machine-checkable sanity pass over the numerical core: finite
// difference gradient checks plus codec roundtrips.
int cmd_selftest(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xabcdef);
    int failures = 0;
    auto report = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    {  // Pose codec roundtrip.
        const RotationBinTable table = generate_bin_table(32, seed);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const Mat3 r = random_rotation(rng);
            const Mat3 back = decode_pose(encode_pose(r, table), table);
            worst = std::max(worst, (back - r).norm());
        }
        report("pose codec roundtrip (n=32, 200 samples)", worst < 1e-9);
    }
    {  // Translation codec roundtrip.
        const TranslationBinTable table = default_translation_bins();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            Vec3 t;
            for (int a = 0; a < 3; ++a)
                t[a] = table.range_min[a] +
                       u(rng) * (table.range_max[a] - table.range_min[a]);
            const Vec3 back =
                decode_translation(encode_translation(t, table).code, table);
            worst = std::max(worst, (back - t).norm());
        }
        report("translation codec roundtrip (200 samples)", worst < 1e-9);
    }
    {  // binvox roundtrip.
        std::uniform_int_distribution<int> bit(0, 1);
        bool ok = true;
        for (int k = 0; k < 5; ++k) {
            OccupancyGrid g(16);
            for (auto& v : g.data) v = static_cast<std::uint8_t>(bit(rng));
            ok = ok && read_binvox(write_binvox(g)) == g;
        }
        report("binvox write/read identity (5 random 16^3 grids)", ok);
    }
    {  // FD gradient checks on the scalar losses.
        const double h = 1e-6;
        std::normal_distribution<double> g(0.0, 1.0);
        const RotationBinTable table = generate_bin_table(8, seed);

        VecX logits(8);
        for (int i = 0; i < 8; ++i) logits[i] = g(rng);
        const Mat3 r = random_rotation(rng);
        const SoftLabelVector labels = soft_labels(r, table, 0.1, table.spacing);
        double worst = 0.0;
        const ScalarGrad bce = soft_bce_loss(logits, labels);
        for (int i = 0; i < 8; ++i) {
            VecX lp = logits, lm = logits;
            lp[i] += h;
            lm[i] -= h;
            const double fd = (soft_bce_loss(lp, labels).loss -
                               soft_bce_loss(lm, labels).loss) / (2 * h);
            worst = std::max(worst, std::abs(fd - bce.grad[i]));
        }
        report("soft_bce gradient vs finite differences", worst < 1e-5);

        const ScalarGrad ce = cross_entropy_loss(logits, 3);
        worst = 0.0;
        for (int i = 0; i < 8; ++i) {
            VecX lp = logits, lm = logits;
            lp[i] += h;
            lm[i] -= h;
            const double fd = (cross_entropy_loss(lp, 3).loss -
                               cross_entropy_loss(lm, 3).loss) / (2 * h);
            worst = std::max(worst, std::abs(fd - ce.grad[i]));
        }
        report("cross_entropy gradient vs finite differences", worst < 1e-5);

        Vec6 pred;
        for (int i = 0; i < 6; ++i) pred[i] = g(rng);
        const Mat3 target = random_rotation(rng);
        Vec6 an;
        sixd_geodesic(pred, target, &an);
        worst = 0.0;
        for (int i = 0; i < 6; ++i) {
            Vec6 pp = pred, pm = pred;
            pp[i] += h;
            pm[i] -= h;
            const double fd = (sixd_geodesic(pp, target, nullptr) -
                               sixd_geodesic(pm, target, nullptr)) / (2 * h);
            worst = std::max(worst, std::abs(fd - an[i]));
        }
        report("sixd_geodesic gradient vs finite differences", worst < 1e-4);
    }
    if (failures == 0) std::cout << "selftest passed\n";
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disentangled shape/pose embedding toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    bool seed_given = false;

    // gen-bins
    auto* gen_bins = app.add_subcommand("gen-bins", "Generate an SO(3) bin table");
    int gb_n = 32;
    std::string gb_out = "bins.json";
    gen_bins->add_option("--n", gb_n, "Number of bins");
    gen_bins->add_option("--out", gb_out, "Output JSON path");

    // gen-tbins
    auto* gen_tbins =
        app.add_subcommand("gen-tbins", "Generate a translation cube table");
    std::vector<double> gt_min{-0.25, -0.25, 0.5}, gt_max{1.5, 1.5, 10.0};
    std::vector<int> gt_div{4, 4, 8};
    std::string gt_out = "tbins.json";
    gen_tbins->add_option("--min", gt_min, "Range minimum x y z")->expected(3);
    gen_tbins->add_option("--max", gt_max, "Range maximum x y z")->expected(3);
    gen_tbins->add_option("--div", gt_div, "Divisions per axis")->expected(3);
    gen_tbins->add_option("--out", gt_out, "Output JSON path");

    // voxelize
    auto* voxelize = app.add_subcommand("voxelize", "Voxelize an OBJ mesh to binvox");
    std::string vx_mesh, vx_out = "out.binvox";
    int vx_res = 32;
    voxelize->add_option("--mesh", vx_mesh, "Input OBJ path")->required();
    voxelize->add_option("--res", vx_res, "Grid resolution");
    voxelize->add_option("--out", vx_out, "Output binvox path");

    // rotate-voxel
    auto* rotate_voxel =
        app.add_subcommand("rotate-voxel", "Rotate a binvox occupancy grid");
    std::string rv_in, rv_out = "rotated.binvox";
    double rv_az = 0, rv_el = 0, rv_ip = 0;
    rotate_voxel->add_option("--in", rv_in, "Input binvox path")->required();
    rotate_voxel->add_option("--azimuth", rv_az, "Azimuth, degrees");
    rotate_voxel->add_option("--elevation", rv_el, "Elevation, degrees");
    rotate_voxel->add_option("--inplane", rv_ip, "In-plane angle, degrees");
    rotate_voxel->add_option("--out", rv_out, "Output binvox path");

    // encode-pose / decode-pose
    auto* encode = app.add_subcommand("encode-pose", "Encode a rotation as bin+delta");
    std::string ep_bins, ep_rotation, ep_out;
    double ep_az = 0, ep_el = 0, ep_ip = 0;
    encode->add_option("--bins", ep_bins, "Bin table JSON")->required();
    encode->add_option("--azimuth", ep_az, "Azimuth, degrees");
    encode->add_option("--elevation", ep_el, "Elevation, degrees");
    encode->add_option("--inplane", ep_ip, "In-plane angle, degrees");
    encode->add_option("--rotation", ep_rotation,
                       "JSON file with a 9-element rotation (overrides angles)");
    encode->add_option("--out", ep_out, "Output path (stdout when omitted)");

    auto* decode = app.add_subcommand("decode-pose", "Decode a bin+delta pose code");
    std::string dp_bins, dp_code, dp_out;
    decode->add_option("--bins", dp_bins, "Bin table JSON")->required();
    decode->add_option("--code", dp_code, "Pose code JSON (encode-pose output)")
        ->required();
    decode->add_option("--out", dp_out, "Output path (stdout when omitted)");

    // build-db / retrieve
    auto* build_db = app.add_subcommand("build-db", "Build a shape database");
    std::string bd_entries, bd_out = "db.json";
    build_db->add_option("--entries", bd_entries, "Entries JSON")->required();
    build_db->add_option("--out", bd_out, "Output JSON path");

    auto* retrieve = app.add_subcommand("retrieve", "Nearest-shape lookup");
    std::string rt_db, rt_query, rt_out;
    retrieve->add_option("--db", rt_db, "Database JSON")->required();
    retrieve->add_option("--query", rt_query, "Query embedding JSON")->required();
    retrieve->add_option("--out", rt_out, "Output path (stdout when omitted)");

    // train-toy
    auto* train = app.add_subcommand("train-toy", "Run the desk-scale trainer");
    int tt_stage = 1;
    std::string tt_config, tt_out = "run";
    train->add_option("--stage", tt_stage, "1 = voxel stage, 2 = both stages")
        ->check(CLI::Range(1, 2));
    train->add_option("--config", tt_config,
                      "JSON config {stage1: {...}, stage2: {...}}");
    train->add_option("--out-dir", tt_out, "Output directory");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Bucketed metrics report");
    std::string ev_pred, ev_report = "report.json";
    bool ev_per_category = false;
    evaluate->add_option("--pred", ev_pred, "Predictions JSONL")->required();
    evaluate->add_option("--report", ev_report, "Output report JSON");
    evaluate->add_flag("--per-category", ev_per_category, "Add per-category stats");

    // selftest
    app.add_subcommand("selftest", "Gradient checks and codec roundtrips");

    auto* seed_opt = app.add_option("--seed", seed, "Random seed (default: POSEKIT_SEED or 0)");
    app.failure_message(CLI::FailureMessage::help);
    // Let `--seed` appear after the subcommand name.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are exit 1; --help is 0
    }
    seed_given = seed_opt->count() > 0;

    try {
        if (!seed_given) seed = env_seed();
        if (gen_bins->parsed()) return cmd_gen_bins(gb_n, seed, gb_out);
        if (gen_tbins->parsed())
            return cmd_gen_tbins(gt_min, gt_max, gt_div, seed, gt_out);
        if (voxelize->parsed()) return cmd_voxelize(vx_mesh, vx_res, seed, vx_out);
        if (rotate_voxel->parsed())
            return cmd_rotate_voxel(rv_in, rv_az, rv_el, rv_ip, seed, rv_out);
        if (encode->parsed())
            return cmd_encode_pose(ep_bins, ep_az, ep_el, ep_ip, ep_rotation,
                                   seed, ep_out);
        if (decode->parsed()) return cmd_decode_pose(dp_bins, dp_code, seed, dp_out);
        if (build_db->parsed()) return cmd_build_db(bd_entries, seed, bd_out);
        if (retrieve->parsed()) return cmd_retrieve(rt_db, rt_query, seed, rt_out);
        if (train->parsed()) return cmd_train_toy(tt_stage, tt_config, seed, tt_out);
        if (evaluate->parsed())
            return cmd_evaluate(ev_pred, ev_report, ev_per_category, seed);
        return cmd_selftest(seed);
    } catch (const posekit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
