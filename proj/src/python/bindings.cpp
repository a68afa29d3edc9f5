#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "posekit/embedding.hpp"
#include "posekit/losses.hpp"
#include "posekit/metrics.hpp"
#include "posekit/rotation.hpp"
#include "posekit/so3_grid.hpp"
#include "posekit/translation.hpp"
#include "posekit/voxel.hpp"

namespace py = pybind11;
using namespace posekit;

PYBIND11_MODULE(_posekit, m) {
    m.doc() = "Disentangled shape/pose embedding toolkit: SO(3) grids, "
              "bin+delta codecs, voxel pipelines, retrieval and metrics.";

    py::register_exception<Error>(m, "PosekitError");

    // rotation
    m.def("geodesic_distance", &geodesic_distance, py::arg("r1"), py::arg("r2"));
    m.def("sixd_to_rotation",
          [](const Vec3& a1, const Vec3& a2) { return sixd_to_rotation({a1, a2}); },
          py::arg("a1"), py::arg("a2"));
    m.def("rotation_to_sixd", [](const Mat3& r) {
        const SixDRep s = rotation_to_sixd(r);
        return py::make_tuple(s.a1, s.a2);
    });
    m.def("euler_to_rotation", [](double azimuth, double elevation, double inplane) {
        return euler_to_rotation({azimuth, elevation, inplane});
    }, py::arg("azimuth"), py::arg("elevation"), py::arg("inplane"));
    m.def("random_rotation", [](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return random_rotation(rng);
    }, py::arg("seed"));
    m.def("is_rotation", &is_rotation, py::arg("m"), py::arg("tol") = kRotationTol);

    // so3 grid
    py::class_<RotationBinTable>(m, "RotationBinTable")
        .def_readonly("bins", &RotationBinTable::bins)
        .def_readonly("seed", &RotationBinTable::seed)
        .def_readonly("spacing", &RotationBinTable::spacing)
        .def_readonly("covering_radius", &RotationBinTable::covering_radius)
        .def_property_readonly("n", &RotationBinTable::n);
    m.def("generate_bin_table", &generate_bin_table, py::arg("n"), py::arg("seed"));
    m.def("nearest_bin",
          [](const Mat3& r, const RotationBinTable& t) { return nearest_bin(r, t); });
    m.def("soft_labels", [](const Mat3& r_gt, const RotationBinTable& t,
                            double alpha, double beta) {
        return soft_labels(r_gt, t, alpha, beta).y;
    }, py::arg("r_gt"), py::arg("table"), py::arg("alpha"), py::arg("beta"));
    m.def("encode_pose", [](const Mat3& r, const RotationBinTable& t) {
        const PoseCode c = encode_pose(r, t);
        return py::make_tuple(c.bin_index, c.delta);
    });
    m.def("decode_pose", [](int bin_index, const Mat3& delta,
                            const RotationBinTable& t) {
        return decode_pose({bin_index, delta}, t);
    }, py::arg("bin_index"), py::arg("delta"), py::arg("table"));

    // translation
    py::class_<TranslationBinTable>(m, "TranslationBinTable")
        .def_readonly("cube_dims", &TranslationBinTable::cube_dims)
        .def_readonly("centers", &TranslationBinTable::centers)
        .def_property_readonly("n", &TranslationBinTable::n);
    m.def("generate_translation_bins",
          [](const Vec3& lo, const Vec3& hi, const std::array<int, 3>& div) {
              return generate_translation_bins(lo, hi, div);
          });
    m.def("default_translation_bins", &default_translation_bins);
    m.def("encode_translation", [](const Vec3& t, const TranslationBinTable& table) {
        const EncodedTranslation e = encode_translation(t, table);
        return py::make_tuple(e.code.bin_index, e.code.delta, e.out_of_range);
    });
    m.def("decode_translation",
          [](int bin_index, const Vec3& delta, const TranslationBinTable& table) {
              return decode_translation({bin_index, delta}, table);
          });

    // voxel
    py::class_<OccupancyGrid>(m, "OccupancyGrid")
        .def_readonly("resolution", &OccupancyGrid::resolution)
        .def("occupied_count", &OccupancyGrid::occupied_count)
        .def("numpy", [](const OccupancyGrid& g) {
            py::array_t<std::uint8_t> arr({g.resolution, g.resolution, g.resolution});
            auto view = arr.mutable_unchecked<3>();
            for (int z = 0; z < g.resolution; ++z)
                for (int y = 0; y < g.resolution; ++y)
                    for (int x = 0; x < g.resolution; ++x)
                        view(x, y, z) = g.at(x, y, z) ? 1 : 0;
            return arr;
        });
    py::class_<TriangleMesh>(m, "TriangleMesh")
        .def_readonly("vertices", &TriangleMesh::vertices)
        .def_readonly("triangles", &TriangleMesh::triangles);
    m.def("make_synthetic_shape", [](const std::string& kind, const Vec3& dims,
                                     std::uint64_t seed) {
        ShapeParams params;
        params.dims = dims;
        return make_synthetic_shape(shape_kind_from_string(kind), params, seed);
    }, py::arg("kind"), py::arg("dims"), py::arg("seed") = 0);
    m.def("voxelize_mesh", &voxelize_mesh, py::arg("mesh"), py::arg("resolution") = 32);
    m.def("rotate_grid", &rotate_grid);
    m.def("read_binvox", [](py::bytes data) { return read_binvox(std::string(data)); });
    m.def("write_binvox", [](const OccupancyGrid& g) { return py::bytes(write_binvox(g)); });
    m.def("render_silhouette", &render_silhouette, py::arg("mesh"), py::arg("r"),
          py::arg("t"), py::arg("resolution") = 32, py::arg("focal") = 2.0);

    // retrieval
    py::class_<ShapeDatabase>(m, "ShapeDatabase")
        .def_property_readonly("dim", &ShapeDatabase::dim)
        .def("__len__", [](const ShapeDatabase& db) { return db.entries.size(); });
    m.def("build_database", [](const std::vector<std::tuple<std::string, std::string,
                                                            VecX>>& raw) {
        std::vector<ShapeEntry> entries;
        for (const auto& [id, category, vec] : raw)
            entries.push_back({id, category, vec});
        return build_database(std::move(entries));
    });
    m.def("nearest_shape", [](const VecX& query, const ShapeDatabase& db) {
        const RetrievalResult r = nearest_shape(query, db);
        return py::make_tuple(r.shape_id, r.distance);
    });

    // metrics
    m.def("med_err_deg", [](const std::vector<std::pair<Mat3, Mat3>>& pairs) {
        std::vector<PredictionRecord> records;
        for (size_t i = 0; i < pairs.size(); ++i) {
            PredictionRecord r;
            r.instance_id = std::to_string(i);
            r.pred_rotation = pairs[i].first;
            r.gt_rotation = pairs[i].second;
            records.push_back(r);
        }
        return med_err(records);
    });

    m.attr("__version__") = "0.1.0";
}
