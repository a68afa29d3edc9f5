#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "posekit/rotation.hpp"

namespace posekit {

/// Binary voxel volume. data is x-fastest: index = x + res*(y + res*z).
/// translate/scale carry the binvox world-space metadata.
struct OccupancyGrid {
    int resolution = 32;
    std::vector<std::uint8_t> data;
    Vec3 translate = Vec3::Zero();
    double scale = 1.0;

    OccupancyGrid() = default;
    explicit OccupancyGrid(int res)
        : resolution(res),
          data(static_cast<size_t>(res) * res * res, 0) {}

    size_t index(int x, int y, int z) const {
        return static_cast<size_t>(x) +
               static_cast<size_t>(resolution) * (static_cast<size_t>(y) +
               static_cast<size_t>(resolution) * static_cast<size_t>(z));
    }
    bool at(int x, int y, int z) const { return data[index(x, y, z)] != 0; }
    void set(int x, int y, int z, bool v) { data[index(x, y, z)] = v ? 1 : 0; }
    size_t occupied_count() const;
    bool operator==(const OccupancyGrid& other) const {
        return resolution == other.resolution && data == other.data;
    }
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

enum class ShapeKind { Box, Cylinder, Ellipsoid, LShape };

ShapeKind shape_kind_from_string(const std::string& s);

struct ShapeParams {
    // Box/ellipsoid: per-axis extents/radii. Cylinder: dims[0] = radius,
    // dims[2] = height. LShape: outer extents; arm thickness = dims * 0.4.
    Vec3 dims{1.0, 1.0, 1.0};
    int segments = 16;       // cylinder circumference divisions
    int subdivisions = 2;    // ellipsoid icosphere refinement levels
    double jitter = 0.0;     // relative dimension jitter drawn from seed
    /// Adds a small off-center cube next to the body, breaking all
    /// rotational symmetries so orientation is recoverable from geometry.
    bool marker = false;
};

// binvox v1 binary format (ASCII header + RLE byte pairs), bit-exact on
// the wire. binvox stores voxels y-fastest ([x][z][y]); converted to and
// from the x-fastest layout above.
OccupancyGrid read_binvox(const std::string& bytes);
std::string write_binvox(const OccupancyGrid& grid);
OccupancyGrid load_binvox(const std::string& path);
void save_binvox(const OccupancyGrid& grid, const std::string& path);

/// Every edge shared by exactly two triangles, with opposite winding.
bool is_watertight(const TriangleMesh& mesh);

/// Scales the mesh uniformly to fit the grid with a 1-voxel margin,
/// centered. Watertight meshes get solid interiors via parity ray
/// casting along +x; open meshes fall back to surface rasterization.
OccupancyGrid voxelize_mesh(const TriangleMesh& mesh, int resolution);

/// Inverse-mapping nearest-neighbor resample about the grid center.
/// Rotation by the identity is exact.
OccupancyGrid rotate_grid(const OccupancyGrid& grid, const Mat3& r);

TriangleMesh make_synthetic_shape(ShapeKind kind, const ShapeParams& params,
                                  std::uint64_t seed);

TriangleMesh rotate_mesh(const TriangleMesh& mesh, const Mat3& r);

/// Weak-perspective binary silhouette of the rotated, translated mesh:
/// (X, Y, Z) projects to focal * (X + tx, Y + ty) / (Z + tz). Row 0 is
/// the top of the image; values are 0/1.
std::vector<float> render_silhouette(const TriangleMesh& mesh, const Mat3& r,
                                     const Vec3& t, int resolution,
                                     double focal = 2.0);

// OBJ subset: v and (triangulated) f lines.
TriangleMesh read_obj(const std::string& text);
TriangleMesh load_obj(const std::string& path);
std::string write_obj(const TriangleMesh& mesh);

}  // namespace posekit
