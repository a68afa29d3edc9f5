#include "posekit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace posekit {

namespace {

struct SampleSet {
    MatX inputs;
    std::vector<SampleTargets> targets;
    std::vector<int> shape_index;
    std::vector<Mat3> rotations;
    std::vector<Vec3> translations;
};

SampleTargets make_rotation_targets(const Mat3& r_gt, const RotationBinTable& table,
                                    double alpha, double beta) {
    SampleTargets t;
    const double beta_eff = beta > 0.0 ? beta : std::max(table.spacing, 1e-6);
    t.rot_labels = soft_labels(r_gt, table, alpha, beta_eff);
    t.rot_delta_targets.assign(table.n(), Mat3::Identity());
    for (int i = 0; i < table.n(); ++i)
        if (t.rot_labels.y[i] > 0.0) {
            t.active_bins.push_back(i);
            t.rot_delta_targets[i] = table.bins[i] * r_gt;
        }
    return t;
}

// Mean loss over the epoch plus one Adam step per minibatch.
std::vector<LossBreakdown> run_training(MlpModel& model, const SampleSet& data,
                                        Stage stage, int epochs, int batch_size,
                                        double lr, double huber_delta,
                                        std::uint64_t seed) {
    const int total = static_cast<int>(data.targets.size());
    if (total == 0) throw ConfigError("empty training set");
    std::mt19937_64 rng(seed);
    AdamState adam;
    AdamConfig adam_config;
    adam_config.lr = lr;
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::vector<LossBreakdown> trajectory;
    const MlpConfig& cfg = model.config();

    for (int epoch = 0; epoch < epochs; ++epoch) {
        // Step decay: full rate for the first half, then 0.3x, then 0.1x
        // for the final fifth.
        const double progress = epochs > 1 ? double(epoch) / (epochs - 1) : 0.0;
        adam_config.lr = lr * (progress < 0.5 ? 1.0 : progress < 0.8 ? 0.3 : 0.1);
        std::shuffle(order.begin(), order.end(), rng);
        LossBreakdown epoch_mean;
        for (int start = 0; start < total; start += batch_size) {
            const int bsz = std::min(batch_size, total - start);
            MatX batch_input(bsz, data.inputs.cols());
            for (int b = 0; b < bsz; ++b)
                batch_input.row(b) = data.inputs.row(order[start + b]);
            MlpModel::Batch fwd = model.forward(batch_input);

            MlpModel::Batch grads;
            grads.cls_logits = MatX::Zero(bsz, cfg.num_classes);
            grads.rot_bin_logits = MatX::Zero(bsz, cfg.num_rot_bins);
            grads.rot_sixd = MatX::Zero(bsz, 6 * cfg.num_rot_bins);
            grads.t_bin_logits = MatX::Zero(bsz, cfg.num_t_bins);
            grads.t_deltas = MatX::Zero(bsz, 3 * cfg.num_t_bins);
            grads.embedding = MatX::Zero(bsz, cfg.embedding_dim());

            for (int b = 0; b < bsz; ++b) {
                const SampleTargets& targets = data.targets[order[start + b]];
                const HeadOutputs outputs = model.sample_outputs(fwd, b);
                const TotalLossResult result =
                    total_loss(outputs, targets, stage, huber_delta);
                const double inv = 1.0 / bsz;
                grads.cls_logits.row(b) = result.grads.cls_logits.transpose() * inv;
                grads.rot_bin_logits.row(b) =
                    result.grads.rot_bin_logits.transpose() * inv;
                for (int i = 0; i < cfg.num_rot_bins; ++i)
                    grads.rot_sixd.row(b).segment(6 * i, 6) =
                        result.grads.rot_sixd.row(i) * inv;
                if (stage == Stage::Two && cfg.num_t_bins > 0) {
                    grads.t_bin_logits.row(b) =
                        result.grads.t_bin_logits.transpose() * inv;
                    for (int i = 0; i < cfg.num_t_bins; ++i)
                        grads.t_deltas.row(b).segment(3 * i, 3) =
                            result.grads.t_deltas.row(i) * inv;
                    grads.embedding.row(b).head(cfg.shape_dim) =
                        result.grads.embedding.shape.transpose() * inv;
                    grads.embedding.row(b).tail(cfg.pose_dim) =
                        result.grads.embedding.pose.transpose() * inv;
                }
                const double w = 1.0 / total;
                epoch_mean.embed += result.breakdown.embed * w;
                epoch_mean.cls += result.breakdown.cls * w;
                epoch_mean.bin_r += result.breakdown.bin_r * w;
                epoch_mean.delta_r += result.breakdown.delta_r * w;
                epoch_mean.bin_t += result.breakdown.bin_t * w;
                epoch_mean.delta_t += result.breakdown.delta_t * w;
                epoch_mean.total += result.breakdown.total * w;
            }
            const VecX grad = model.backward(fwd, grads);
            adam_step(model.params(), grad, adam, adam_config);
        }
        trajectory.push_back(epoch_mean);
    }
    return trajectory;
}

}  // namespace

std::vector<ShapeSpec> default_shape_set(int count, std::uint64_t seed) {
    if (count < 1) throw ConfigError("shape set needs at least one shape");
    const std::array<ShapeKind, 4> kinds = {ShapeKind::Box, ShapeKind::Cylinder,
                                            ShapeKind::Ellipsoid, ShapeKind::LShape};
    const std::array<std::string, 4> names = {"box", "cylinder", "ellipsoid", "lshape"};
    // Two dimension variants per kind; further shapes jitter harder.
    const std::array<std::array<Vec3, 2>, 4> dims = {{
        {Vec3{1.0, 0.7, 0.45}, Vec3{0.9, 0.9, 0.25}},
        {Vec3{0.5, 0.5, 1.0}, Vec3{0.85, 0.85, 0.5}},
        {Vec3{1.0, 0.55, 0.45}, Vec3{0.8, 0.8, 0.8}},
        {Vec3{1.0, 1.0, 0.4}, Vec3{0.7, 1.2, 0.55}},
    }};
    std::vector<ShapeSpec> shapes;
    for (int i = 0; i < count; ++i) {
        const int kind = i % 4;
        const int variant = (i / 4) % 2;
        ShapeSpec spec;
        spec.kind = kinds[kind];
        spec.category = names[kind];
        spec.id = names[kind] + "_" + std::to_string(i / 4);
        spec.params.dims = dims[kind][variant];
        spec.params.jitter = i >= 8 ? 0.15 : 0.0;
        // Pose must be recoverable from geometry for pose supervision to
        // be consistent across shapes; the L-shape is already asymmetric.
        spec.params.marker = spec.kind != ShapeKind::LShape;
        shapes.push_back(spec);
    }
    return shapes;
}

VecX grid_to_input(const OccupancyGrid& grid, int pool_factor) {
    const int res = grid.resolution;
    if (pool_factor < 1 || res % pool_factor != 0)
        throw ConfigError("pool factor must divide the voxel resolution");
    const int out = res / pool_factor;
    VecX input(static_cast<long>(out) * out * out);
    const double inv = 1.0 / (pool_factor * pool_factor * pool_factor);
    long idx = 0;
    for (int z = 0; z < out; ++z)
        for (int y = 0; y < out; ++y)
            for (int x = 0; x < out; ++x) {
                double sum = 0.0;
                for (int dz = 0; dz < pool_factor; ++dz)
                    for (int dy = 0; dy < pool_factor; ++dy)
                        for (int dx = 0; dx < pool_factor; ++dx)
                            sum += grid.at(x * pool_factor + dx, y * pool_factor + dy,
                                           z * pool_factor + dz);
                input[idx++] = sum * inv;
            }
    return input;
}

Mat3 decode_predicted_pose(const HeadOutputs& outputs, const RotationBinTable& table) {
    int best = 0;
    outputs.rot_bin_logits.maxCoeff(&best);
    const SixDRep rep{outputs.rot_sixd.row(best).head<3>().transpose(),
                      outputs.rot_sixd.row(best).tail<3>().transpose()};
    PoseCode code;
    code.bin_index = best;
    code.delta = sixd_to_rotation(rep);
    return decode_pose(code, table);
}

Vec3 decode_predicted_translation(const HeadOutputs& outputs,
                                  const TranslationBinTable& table) {
    int best = 0;
    outputs.t_bin_logits.maxCoeff(&best);
    TranslationCode code;
    code.bin_index = best;
    code.delta = outputs.t_deltas.row(best).transpose();
    return decode_translation(code, table);
}

Stage1Result train_stage1(const Stage1Config& config, std::uint64_t seed) {
    if (config.num_shapes < 2) throw ConfigError("stage 1 needs >= 2 shapes");
    Stage1Result result;
    result.config = config;
    result.seed = seed;
    result.shapes = default_shape_set(config.num_shapes, seed);
    result.bin_table = generate_bin_table(config.num_rot_bins, config.bin_seed);

    std::vector<TriangleMesh> meshes;
    std::vector<OccupancyGrid> canonical;
    for (size_t i = 0; i < result.shapes.size(); ++i) {
        const ShapeSpec& spec = result.shapes[i];
        meshes.push_back(make_synthetic_shape(spec.kind, spec.params, seed + i));
        canonical.push_back(voxelize_mesh(meshes.back(), config.voxel_resolution));
    }

    auto sample_input = [&](int shape, const Mat3& r) {
        const OccupancyGrid grid =
            config.revoxelize
                ? voxelize_mesh(rotate_mesh(meshes[shape], r), config.voxel_resolution)
                : rotate_grid(canonical[shape], r);
        return grid_to_input(grid, config.pool_factor);
    };

    std::mt19937_64 rng(seed);
    const int input_dim = static_cast<int>(
        grid_to_input(canonical[0], config.pool_factor).size());
    const int per_shape = config.rotations_per_shape + config.heldout_per_shape;
    SampleSet train;
    SampleSet heldout;
    train.inputs.resize(config.num_shapes * config.rotations_per_shape, input_dim);
    heldout.inputs.resize(config.num_shapes * config.heldout_per_shape, input_dim);
    // One rotation list shared by every shape: the same rotation then
    // carries the same pose targets across shapes, which pushes the pose
    // partition toward shape-invariance without an explicit pairing term.
    std::vector<Mat3> rotations;
    rotations.reserve(per_shape);
    for (int k = 0; k < per_shape; ++k) rotations.push_back(random_rotation(rng));
    result.train_rotations.assign(rotations.begin(),
                                  rotations.begin() + config.rotations_per_shape);
    int train_row = 0, held_row = 0;
    for (int s = 0; s < config.num_shapes; ++s)
        for (int k = 0; k < per_shape; ++k) {
            const Mat3& r = rotations[k];
            SampleTargets targets =
                make_rotation_targets(r, result.bin_table, config.alpha, config.beta);
            targets.gt_class = s;
            SampleSet& dest = k < config.rotations_per_shape ? train : heldout;
            int& row = k < config.rotations_per_shape ? train_row : held_row;
            dest.inputs.row(row++) = sample_input(s, r).transpose();
            dest.targets.push_back(std::move(targets));
            dest.shape_index.push_back(s);
            dest.rotations.push_back(r);
        }

    MlpConfig mlp_config;
    mlp_config.input_dim = input_dim;
    mlp_config.hidden_dim = config.hidden_dim;
    mlp_config.shape_dim = config.shape_dim;
    mlp_config.pose_dim = config.pose_dim;
    mlp_config.num_classes = config.num_shapes;
    mlp_config.num_rot_bins = config.num_rot_bins;
    mlp_config.num_t_bins = 0;
    result.model = MlpModel(mlp_config, seed ^ 0x9e3779b97f4a7c15ULL);

    result.trajectory =
        run_training(result.model, train, Stage::One, config.epochs,
                     config.batch_size, config.lr, 1.0, seed + 1);

    // Shape database: per-shape mean of the training-pose shape
    // embeddings. The embedding is nominally pose-invariant, so any
    // representative works; the mean is the stable choice at this scale.
    {
        const MlpModel::Batch fwd = result.model.forward(train.inputs);
        MatX sums = MatX::Zero(config.num_shapes, config.shape_dim);
        VecX counts = VecX::Zero(config.num_shapes);
        for (int i = 0; i < static_cast<int>(train.shape_index.size()); ++i) {
            sums.row(train.shape_index[i]) +=
                fwd.embedding.row(i).head(config.shape_dim);
            counts[train.shape_index[i]] += 1.0;
        }
        std::vector<ShapeEntry> entries;
        for (int s = 0; s < config.num_shapes; ++s) {
            ShapeEntry e;
            e.id = result.shapes[s].id;
            e.category = result.shapes[s].category;
            e.embedding = sums.row(s).transpose() / counts[s];
            entries.push_back(std::move(e));
        }
        result.database = build_database(std::move(entries));
    }

    if (!heldout.targets.empty()) {
        const MlpModel::Batch fwd = result.model.forward(heldout.inputs);
        int correct = 0;
        for (int i = 0; i < static_cast<int>(heldout.targets.size()); ++i) {
            int pred = 0;
            fwd.cls_logits.row(i).maxCoeff(&pred);
            if (pred == heldout.shape_index[i]) ++correct;
        }
        result.heldout_class_accuracy =
            static_cast<double>(correct) / heldout.targets.size();
    }
    return result;
}

Stage2Result train_stage2(const Stage2Config& config, const Stage1Result& stage1,
                          std::uint64_t seed) {
    Stage2Result result;
    result.config = config;
    result.t_table =
        generate_translation_bins(config.t_min, config.t_max, config.t_divisions);

    const Stage1Config& s1 = stage1.config;
    // Rebuild the stage-1 geometry exactly (same per-mesh seeds).
    std::vector<TriangleMesh> meshes;
    for (size_t i = 0; i < stage1.shapes.size(); ++i)
        meshes.push_back(make_synthetic_shape(stage1.shapes[i].kind,
                                              stage1.shapes[i].params,
                                              stage1.seed + i));

    const int num_shapes = static_cast<int>(stage1.shapes.size());
    if (config.pool_factor < 1 ||
        config.image_resolution % config.pool_factor != 0)
        throw ConfigError("image pool factor must divide the resolution");
    const int pooled_res = config.image_resolution / config.pool_factor;
    const int input_dim = pooled_res * pooled_res;
    const int per_shape = config.renders_per_shape + config.heldout_per_shape;
    auto pool_image = [&](const std::vector<float>& image) {
        VecX out = VecX::Zero(input_dim);
        for (int y = 0; y < config.image_resolution; ++y)
            for (int x = 0; x < config.image_resolution; ++x)
                out[(y / config.pool_factor) * pooled_res + x / config.pool_factor] +=
                    image[static_cast<size_t>(y) * config.image_resolution + x];
        return VecX(out / (config.pool_factor * config.pool_factor));
    };

    std::mt19937_64 rng(seed);
    SampleSet train, heldout;
    train.inputs.resize(num_shapes * config.renders_per_shape, input_dim);
    heldout.inputs.resize(num_shapes * config.heldout_per_shape, input_dim);
    int train_row = 0, held_row = 0;
    for (int s = 0; s < num_shapes; ++s)
        for (int k = 0; k < per_shape; ++k) {
            const Mat3 r = random_rotation(rng);
            Vec3 t;
            for (int a = 0; a < 3; ++a) {
                std::uniform_real_distribution<double> u(config.t_min[a], config.t_max[a]);
                t[a] = u(rng);
            }
            const std::vector<float> image = render_silhouette(
                meshes[s], r, t, config.image_resolution, config.focal);

            SampleTargets targets =
                make_rotation_targets(r, stage1.bin_table, config.alpha, config.beta);
            targets.gt_class = s;
            const EncodedTranslation enc = encode_translation(t, result.t_table);
            targets.t_bin = enc.code.bin_index;
            targets.t_delta = enc.code.delta;
            const OccupancyGrid gt_grid =
                voxelize_mesh(rotate_mesh(meshes[s], r), s1.voxel_resolution);
            targets.gt_embedding =
                stage1.model.embed(grid_to_input(gt_grid, s1.pool_factor));

            SampleSet& dest = k < config.renders_per_shape ? train : heldout;
            int& row = k < config.renders_per_shape ? train_row : held_row;
            dest.inputs.row(row) = pool_image(image).transpose();
            ++row;
            dest.targets.push_back(std::move(targets));
            dest.shape_index.push_back(s);
            dest.rotations.push_back(r);
            dest.translations.push_back(t);
        }

    MlpConfig mlp_config;
    mlp_config.input_dim = input_dim;
    mlp_config.hidden_dim = config.hidden_dim;
    mlp_config.shape_dim = s1.shape_dim;
    mlp_config.pose_dim = s1.pose_dim;
    mlp_config.num_classes = num_shapes;
    mlp_config.num_rot_bins = stage1.bin_table.n();
    mlp_config.num_t_bins = result.t_table.n();
    result.model = MlpModel(mlp_config, seed ^ 0xd1b54a32d192ed03ULL);

    result.trajectory =
        run_training(result.model, train, Stage::Two, config.epochs,
                     config.batch_size, config.lr, config.huber_delta, seed + 1);

    // Held-out evaluation: retrieval, decoded pose, decoded translation.
    if (!heldout.targets.empty()) {
        const MlpModel::Batch fwd = result.model.forward(heldout.inputs);
        int top1 = 0;
        double t_err_sum = 0.0;
        for (int i = 0; i < static_cast<int>(heldout.targets.size()); ++i) {
            const HeadOutputs outputs = result.model.sample_outputs(fwd, i);
            const RetrievalResult retrieved =
                nearest_shape(outputs.embedding.shape, stage1.database);
            const Mat3 pred_rot = decode_predicted_pose(outputs, stage1.bin_table);
            const Vec3 pred_t = decode_predicted_translation(outputs, result.t_table);
            const int s = heldout.shape_index[i];

            PredictionRecord record;
            record.instance_id = stage1.shapes[s].id + "#" + std::to_string(i);
            record.pred_rotation = pred_rot;
            record.gt_rotation = heldout.rotations[i];
            record.pred_shape_id = retrieved.shape_id;
            record.gt_shape_id = stage1.shapes[s].id;
            record.category = stage1.shapes[s].category;
            record.bbox_area = heldout.inputs.row(i).sum();
            result.heldout_records.push_back(record);

            if (retrieved.shape_id == record.gt_shape_id) ++top1;
            const double t_err = (pred_t - heldout.translations[i]).norm();
            t_err_sum += t_err;
            result.max_translation_error = std::max(result.max_translation_error, t_err);
        }
        const double n = static_cast<double>(heldout.targets.size());
        result.top1_accuracy = top1 / n;
        result.med_err_deg = med_err(result.heldout_records);
        result.mean_translation_error = t_err_sum / n;
    }
    return result;
}

ProbeResult disentanglement_probe(const Stage1Result& stage1, int num_pairs,
                                  std::uint64_t seed) {
    if (num_pairs < 1) throw ConfigError("probe needs at least one pair");
    const Stage1Config& cfg = stage1.config;
    std::vector<TriangleMesh> meshes;
    for (size_t i = 0; i < stage1.shapes.size(); ++i)
        meshes.push_back(make_synthetic_shape(stage1.shapes[i].kind,
                                              stage1.shapes[i].params,
                                              stage1.seed + i));
    auto sample_input = [&](int shape, const Mat3& r) {
        return grid_to_input(
            voxelize_mesh(rotate_mesh(meshes[shape], r), cfg.voxel_resolution),
            cfg.pool_factor);
    };
    auto pose_argmax = [&](int shape, const Mat3& r) {
        const MlpModel::Batch fwd =
            stage1.model.forward(sample_input(shape, r).transpose());
        int best = 0;
        fwd.rot_bin_logits.row(0).maxCoeff(&best);
        return best;
    };
    auto retrieve_id = [&](int shape, const Mat3& r) {
        return nearest_shape(stage1.model.embed(sample_input(shape, r)).shape,
                             stage1.database).shape_id;
    };

    std::mt19937_64 rng(seed);
    const int num_shapes = static_cast<int>(stage1.shapes.size());
    std::uniform_int_distribution<int> pick(0, num_shapes - 1);
    const std::vector<Mat3>& pool = stage1.train_rotations;
    auto draw_rotation = [&]() {
        if (pool.empty()) return random_rotation(rng);
        std::uniform_int_distribution<size_t> pr(0, pool.size() - 1);
        return pool[pr(rng)];
    };
    int pose_stable = 0, retrieval_stable = 0;
    for (int p = 0; p < num_pairs; ++p) {
        // Shape swap at fixed rotation.
        const Mat3 r = draw_rotation();
        const int s1 = pick(rng);
        int s2 = pick(rng);
        while (s2 == s1) s2 = pick(rng);
        if (pose_argmax(s1, r) == pose_argmax(s2, r)) ++pose_stable;
        // Rotation swap at fixed shape.
        const int s = pick(rng);
        const Mat3 r1 = draw_rotation();
        Mat3 r2 = draw_rotation();
        for (int tries = 0; tries < 16 && (r2 - r1).norm() < 1e-12; ++tries)
            r2 = draw_rotation();
        if (retrieve_id(s, r1) == retrieve_id(s, r2)) ++retrieval_stable;
    }
    ProbeResult result;
    result.pose_stability = static_cast<double>(pose_stable) / num_pairs;
    result.retrieval_stability = static_cast<double>(retrieval_stable) / num_pairs;
    return result;
}

std::string trajectory_to_csv(const std::vector<LossBreakdown>& trajectory) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,embed,cls,bin_r,delta_r,bin_t,delta_t,total\n";
    for (size_t i = 0; i < trajectory.size(); ++i) {
        const LossBreakdown& b = trajectory[i];
        out << i << "," << b.embed << "," << b.cls << "," << b.bin_r << ","
            << b.delta_r << "," << b.bin_t << "," << b.delta_t << "," << b.total
            << "\n";
    }
    return out.str();
}

Stage1Config stage1_config_from_json(const nlohmann::json& j) {
    Stage1Config c;
    try {
        c.num_shapes = j.value("num_shapes", c.num_shapes);
        c.num_rot_bins = j.value("num_rot_bins", c.num_rot_bins);
        c.bin_seed = j.value("bin_seed", c.bin_seed);
        c.rotations_per_shape = j.value("rotations_per_shape", c.rotations_per_shape);
        c.heldout_per_shape = j.value("heldout_per_shape", c.heldout_per_shape);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.shape_dim = j.value("shape_dim", c.shape_dim);
        c.pose_dim = j.value("pose_dim", c.pose_dim);
        c.lr = j.value("lr", c.lr);
        c.alpha = j.value("alpha", c.alpha);
        c.beta = j.value("beta", c.beta);
        c.voxel_resolution = j.value("voxel_resolution", c.voxel_resolution);
        c.pool_factor = j.value("pool_factor", c.pool_factor);
        c.revoxelize = j.value("revoxelize", c.revoxelize);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad stage-1 config: ") + e.what());
    }
    return c;
}

Stage2Config stage2_config_from_json(const nlohmann::json& j) {
    Stage2Config c;
    try {
        c.renders_per_shape = j.value("renders_per_shape", c.renders_per_shape);
        c.heldout_per_shape = j.value("heldout_per_shape", c.heldout_per_shape);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.lr = j.value("lr", c.lr);
        c.image_resolution = j.value("image_resolution", c.image_resolution);
        c.pool_factor = j.value("pool_factor", c.pool_factor);
        c.focal = j.value("focal", c.focal);
        c.huber_delta = j.value("huber_delta", c.huber_delta);
        c.alpha = j.value("alpha", c.alpha);
        c.beta = j.value("beta", c.beta);
        if (j.contains("t_min")) {
            const auto& v = j.at("t_min");
            c.t_min = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        }
        if (j.contains("t_max")) {
            const auto& v = j.at("t_max");
            c.t_max = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        }
        if (j.contains("t_divisions"))
            c.t_divisions = j.at("t_divisions").get<std::array<int, 3>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad stage-2 config: ") + e.what());
    }
    return c;
}

}  // namespace posekit
