#include "posekit/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace posekit {

size_t OccupancyGrid::occupied_count() const {
    return static_cast<size_t>(std::count_if(data.begin(), data.end(),
                                             [](std::uint8_t v) { return v != 0; }));
}

// ---------------------------------------------------------------------------
// binvox I/O
// ---------------------------------------------------------------------------

OccupancyGrid read_binvox(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string line;
    if (!std::getline(in, line) || line.rfind("#binvox 1", 0) != 0)
        throw MalformedHeader("missing '#binvox 1' header line");
    int dx = 0, dy = 0, dz = 0;
    Vec3 translate = Vec3::Zero();
    double scale = 1.0;
    bool have_dim = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "dim") {
            if (!(ls >> dx >> dy >> dz)) throw MalformedHeader("bad dim line");
            have_dim = true;
        } else if (tok == "translate") {
            if (!(ls >> translate.x() >> translate.y() >> translate.z()))
                throw MalformedHeader("bad translate line");
        } else if (tok == "scale") {
            if (!(ls >> scale)) throw MalformedHeader("bad scale line");
        } else if (tok == "data") {
            break;
        } else if (!tok.empty()) {
            throw MalformedHeader("unknown header token '" + tok + "'");
        }
    }
    if (!have_dim) throw MalformedHeader("missing dim line");
    if (dx != dy || dy != dz || dx < 1)
        throw DimensionMismatch("binvox dims must be equal and positive");

    OccupancyGrid grid(dx);
    grid.translate = translate;
    grid.scale = scale;
    const size_t total = static_cast<size_t>(dx) * dx * dx;
    const std::streamoff payload_start = in.tellg();
    if (payload_start < 0) throw TruncatedRLEPayload("missing RLE payload");

    size_t cursor = 0;
    const int res = dx;
    size_t pos = static_cast<size_t>(payload_start);
    while (cursor < total) {
        if (pos + 1 >= bytes.size())
            throw TruncatedRLEPayload("RLE payload ends before grid is full");
        const std::uint8_t value = static_cast<std::uint8_t>(bytes[pos]);
        const std::uint8_t count = static_cast<std::uint8_t>(bytes[pos + 1]);
        pos += 2;
        if (value > 1) throw TruncatedRLEPayload("RLE value byte must be 0 or 1");
        if (cursor + count > total)
            throw DimensionMismatch("RLE payload overruns the grid");
        if (value) {
            // binvox order: index = x*d*d + z*d + y (y fastest).
            for (int i = 0; i < count; ++i) {
                const size_t c = cursor + i;
                const int x = static_cast<int>(c / (res * res));
                const int z = static_cast<int>((c / res) % res);
                const int y = static_cast<int>(c % res);
                grid.set(x, y, z, true);
            }
        }
        cursor += count;
    }
    if (pos != bytes.size())
        throw DimensionMismatch("RLE payload longer than the grid");
    return grid;
}

std::string write_binvox(const OccupancyGrid& grid) {
    std::ostringstream out;
    out << "#binvox 1\n";
    out << "dim " << grid.resolution << " " << grid.resolution << " "
        << grid.resolution << "\n";
    out << "translate " << grid.translate.x() << " " << grid.translate.y() << " "
        << grid.translate.z() << "\n";
    out << "scale " << grid.scale << "\n";
    out << "data\n";
    const int res = grid.resolution;
    int run_value = -1;
    int run_length = 0;
    auto flush = [&] {
        if (run_length > 0) {
            out.put(static_cast<char>(run_value));
            out.put(static_cast<char>(run_length));
        }
        run_length = 0;
    };
    for (int x = 0; x < res; ++x)
        for (int z = 0; z < res; ++z)
            for (int y = 0; y < res; ++y) {
                const int v = grid.at(x, y, z) ? 1 : 0;
                if (v != run_value || run_length == 255) {
                    flush();
                    run_value = v;
                }
                ++run_length;
            }
    flush();
    return out.str();
}

OccupancyGrid load_binvox(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_binvox(buf.str());
}

void save_binvox(const OccupancyGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    const std::string bytes = write_binvox(grid);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// Mesh queries
// ---------------------------------------------------------------------------

namespace {

void validate_mesh(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) throw DegenerateMesh("mesh has no triangles");
    const int nv = static_cast<int>(mesh.vertices.size());
    for (const auto& t : mesh.triangles)
        for (int idx : t)
            if (idx < 0 || idx >= nv)
                throw DegenerateMesh("triangle index out of range");
}

struct BBox {
    Vec3 lo, hi;
};

BBox mesh_bbox(const TriangleMesh& mesh) {
    BBox box{mesh.vertices.front(), mesh.vertices.front()};
    for (const Vec3& v : mesh.vertices) {
        box.lo = box.lo.cwiseMin(v);
        box.hi = box.hi.cwiseMax(v);
    }
    return box;
}

}  // namespace

bool is_watertight(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) return false;
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            const int a = t[e], b = t[(e + 1) % 3];
            if (a == b) return false;
            if (++directed[{a, b}] > 1) return false;
        }
    for (const auto& [edge, count] : directed) {
        auto it = directed.find({edge.second, edge.first});
        if (it == directed.end() || it->second != 1) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Voxelization
// ---------------------------------------------------------------------------

namespace {

// Transform into grid space: bbox centered at (res-1)/2, longest extent
// scaled to res - 2 (one voxel margin per side).
std::vector<Vec3> mesh_to_grid_space(const TriangleMesh& mesh, int res) {
    const BBox box = mesh_bbox(mesh);
    const Vec3 extent = box.hi - box.lo;
    const double max_extent = extent.maxCoeff();
    if (max_extent <= 0.0) throw DegenerateMesh("mesh has zero extent");
    const double scale = (res - 2) / max_extent;
    const Vec3 mesh_center = 0.5 * (box.lo + box.hi);
    const double grid_center = (res - 1) / 2.0;
    std::vector<Vec3> out;
    out.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices)
        out.push_back((v - mesh_center) * scale + Vec3::Constant(grid_center));
    return out;
}

// Crossings of the +x ray at (y, z) with the triangle, or nullopt-like
// failure when the hit lands on an edge (caller perturbs and retries).
struct RayHit {
    bool hits = false;
    bool degenerate = false;
    double x = 0.0;
};

RayHit ray_triangle_x(double y, double z, const Vec3& p0, const Vec3& p1,
                      const Vec3& p2) {
    RayHit hit;
    // 2D edge functions in the (y, z) projection.
    const double d = (p1.y() - p0.y()) * (p2.z() - p0.z()) -
                     (p2.y() - p0.y()) * (p1.z() - p0.z());
    if (std::abs(d) < 1e-12) return hit;  // triangle edge-on to the ray
    const double w1 = ((y - p0.y()) * (p2.z() - p0.z()) -
                       (p2.y() - p0.y()) * (z - p0.z())) / d;
    const double w2 = ((p1.y() - p0.y()) * (z - p0.z()) -
                       (y - p0.y()) * (p1.z() - p0.z())) / d;
    const double w0 = 1.0 - w1 - w2;
    constexpr double edge_eps = 1e-9;
    if (w0 < -edge_eps || w1 < -edge_eps || w2 < -edge_eps) return hit;
    if (w0 < edge_eps || w1 < edge_eps || w2 < edge_eps) {
        hit.degenerate = true;
        return hit;
    }
    hit.hits = true;
    hit.x = w0 * p0.x() + w1 * p1.x() + w2 * p2.x();
    return hit;
}

void fill_solid(OccupancyGrid& grid, const std::vector<Vec3>& verts,
                const std::vector<std::array<int, 3>>& tris) {
    const int res = grid.resolution;
    std::vector<double> crossings;
    for (int z = 0; z < res; ++z)
        for (int y = 0; y < res; ++y) {
            // Deterministic ray perturbation on degenerate (edge) hits.
            double oy = y, oz = z;
            for (int attempt = 0; attempt < 16; ++attempt) {
                crossings.clear();
                bool degenerate = false;
                for (const auto& t : tris) {
                    const RayHit hit =
                        ray_triangle_x(oy, oz, verts[t[0]], verts[t[1]], verts[t[2]]);
                    if (hit.degenerate) {
                        degenerate = true;
                        break;
                    }
                    if (hit.hits) crossings.push_back(hit.x);
                }
                if (!degenerate) break;
                oy = y + 1.4142e-4 * (attempt + 1);
                oz = z + 2.2361e-4 * (attempt + 1);
            }
            if (crossings.empty()) continue;
            std::sort(crossings.begin(), crossings.end());
            for (int x = 0; x < res; ++x) {
                const auto above = crossings.end() -
                                   std::upper_bound(crossings.begin(),
                                                    crossings.end(),
                                                    static_cast<double>(x));
                if (above % 2 == 1) grid.set(x, y, z, true);
            }
        }
}

void rasterize_surface(OccupancyGrid& grid, const std::vector<Vec3>& verts,
                       const std::vector<std::array<int, 3>>& tris) {
    const int res = grid.resolution;
    auto mark = [&](const Vec3& p) {
        const int x = static_cast<int>(std::lround(p.x()));
        const int y = static_cast<int>(std::lround(p.y()));
        const int z = static_cast<int>(std::lround(p.z()));
        if (x >= 0 && x < res && y >= 0 && y < res && z >= 0 && z < res)
            grid.set(x, y, z, true);
    };
    for (const auto& t : tris) {
        const Vec3 &p0 = verts[t[0]], &p1 = verts[t[1]], &p2 = verts[t[2]];
        const double longest = std::max({(p1 - p0).norm(), (p2 - p0).norm(),
                                         (p2 - p1).norm()});
        const int n = std::max(1, static_cast<int>(std::ceil(longest / 0.25)));
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n - i; ++j) {
                const double u = static_cast<double>(i) / n;
                const double v = static_cast<double>(j) / n;
                mark(p0 + u * (p1 - p0) + v * (p2 - p0));
            }
    }
}

}  // namespace

OccupancyGrid voxelize_mesh(const TriangleMesh& mesh, int resolution) {
    validate_mesh(mesh);
    if (resolution < 4) throw InvalidParams("voxel resolution must be >= 4");
    OccupancyGrid grid(resolution);
    const std::vector<Vec3> verts = mesh_to_grid_space(mesh, resolution);
    if (is_watertight(mesh))
        fill_solid(grid, verts, mesh.triangles);
    else
        rasterize_surface(grid, verts, mesh.triangles);
    if (grid.occupied_count() == 0)
        rasterize_surface(grid, verts, mesh.triangles);
    return grid;
}

OccupancyGrid rotate_grid(const OccupancyGrid& grid, const Mat3& r) {
    const int res = grid.resolution;
    OccupancyGrid out(res);
    out.translate = grid.translate;
    out.scale = grid.scale;
    const double c = (res - 1) / 2.0;
    const Mat3 inv = r.transpose();
    for (int z = 0; z < res; ++z)
        for (int y = 0; y < res; ++y)
            for (int x = 0; x < res; ++x) {
                const Vec3 p = inv * (Vec3(x, y, z) - Vec3::Constant(c)) +
                               Vec3::Constant(c);
                const int sx = static_cast<int>(std::lround(p.x()));
                const int sy = static_cast<int>(std::lround(p.y()));
                const int sz = static_cast<int>(std::lround(p.z()));
                if (sx >= 0 && sx < res && sy >= 0 && sy < res && sz >= 0 &&
                    sz < res && grid.at(sx, sy, sz))
                    out.set(x, y, z, true);
            }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic shapes
// ---------------------------------------------------------------------------

namespace {

TriangleMesh make_box(const Vec3& dims) {
    const Vec3 h = dims / 2.0;
    TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? h.x() : -h.x(),
                              (i & 2) ? h.y() : -h.y(),
                              (i & 4) ? h.z() : -h.z()});
    // Outward-facing winding per face.
    m.triangles = {{0, 2, 3}, {0, 3, 1},   // -z
                   {4, 5, 7}, {4, 7, 6},   // +z
                   {0, 1, 5}, {0, 5, 4},   // -y
                   {2, 6, 7}, {2, 7, 3},   // +y
                   {0, 4, 6}, {0, 6, 2},   // -x
                   {1, 3, 7}, {1, 7, 5}};  // +x
    return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
    if (segments < 3) throw InvalidParams("cylinder needs >= 3 segments");
    TriangleMesh m;
    const double hz = height / 2.0;
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * M_PI * i / segments;
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), -hz});
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), hz});
    }
    const int bottom_center = static_cast<int>(m.vertices.size());
    m.vertices.push_back({0, 0, -hz});
    const int top_center = bottom_center + 1;
    m.vertices.push_back({0, 0, hz});
    for (int i = 0; i < segments; ++i) {
        const int j = (i + 1) % segments;
        const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
        m.triangles.push_back({b0, b1, t1});
        m.triangles.push_back({b0, t1, t0});
        m.triangles.push_back({bottom_center, b1, b0});
        m.triangles.push_back({top_center, t0, t1});
    }
    return m;
}

TriangleMesh make_icosphere(const Vec3& radii, int subdivisions) {
    // Icosahedron, then midpoint subdivision projected back to the sphere.
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(verts.size());
            verts.push_back((verts[a] + verts[b]).normalized());
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }
    TriangleMesh m;
    m.vertices.reserve(verts.size());
    for (const Vec3& v : verts) m.vertices.push_back(v.cwiseProduct(radii));
    m.triangles = std::move(faces);
    return m;
}

TriangleMesh make_lshape(const Vec3& dims) {
    const double w = dims.x(), h = dims.y(), d = dims.z();
    const double tx = 0.4 * w, ty = 0.4 * h;
    // L cross-section in xy, counter-clockwise.
    const std::array<std::array<double, 2>, 6> poly = {{
        {0, 0}, {w, 0}, {w, ty}, {tx, ty}, {tx, h}, {0, h}}};
    TriangleMesh m;
    for (int layer = 0; layer < 2; ++layer) {
        const double z = layer ? d / 2.0 : -d / 2.0;
        for (const auto& p : poly)
            m.vertices.push_back({p[0] - w / 2.0, p[1] - h / 2.0, z});
    }
    // Concave hexagon split into two rectangles (indices into poly).
    const std::array<std::array<int, 3>, 4> cap = {{
        {0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}}};
    for (const auto& t : cap) {
        m.triangles.push_back({t[0], t[2], t[1]});           // bottom, -z out
        m.triangles.push_back({t[0] + 6, t[1] + 6, t[2] + 6});  // top
    }
    for (int i = 0; i < 6; ++i) {
        const int j = (i + 1) % 6;
        m.triangles.push_back({i, j, j + 6});
        m.triangles.push_back({i, j + 6, i + 6});
    }
    return m;
}

}  // namespace

ShapeKind shape_kind_from_string(const std::string& s) {
    if (s == "box") return ShapeKind::Box;
    if (s == "cylinder") return ShapeKind::Cylinder;
    if (s == "ellipsoid") return ShapeKind::Ellipsoid;
    if (s == "lshape") return ShapeKind::LShape;
    throw InvalidParams("unknown shape kind '" + s + "'");
}

TriangleMesh make_synthetic_shape(ShapeKind kind, const ShapeParams& params,
                                  std::uint64_t seed) {
    Vec3 dims = params.dims;
    if (dims.minCoeff() <= 0.0) throw InvalidParams("shape dims must be positive");
    if (params.jitter > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-params.jitter, params.jitter);
        for (int a = 0; a < 3; ++a) dims[a] *= 1.0 + u(rng);
    }
    TriangleMesh mesh;
    switch (kind) {
        case ShapeKind::Box:
            mesh = make_box(dims);
            break;
        case ShapeKind::Cylinder:
            mesh = make_cylinder(dims.x(), dims.z(), params.segments);
            break;
        case ShapeKind::Ellipsoid:
            mesh = make_icosphere(dims / 2.0, params.subdivisions);
            break;
        case ShapeKind::LShape:
            mesh = make_lshape(dims);
            break;
        default:
            throw InvalidParams("unknown shape kind");
    }
    if (params.marker) {
        // Detached cube past the +x face at a generic offset: no proper
        // rotation of the body maps the composite onto itself.
        Vec3 h = Vec3::Zero();
        for (const Vec3& v : mesh.vertices) h = h.cwiseMax(v.cwiseAbs());
        const double m = 0.4 * h.x();
        const Vec3 center(h.x() + 0.75 * m, 0.35 * h.y(), 0.7 * h.z());
        TriangleMesh cube = make_box(Vec3(m, m, m));
        const int base = static_cast<int>(mesh.vertices.size());
        for (const Vec3& v : cube.vertices) mesh.vertices.push_back(v + center);
        for (const auto& t : cube.triangles)
            mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
    return mesh;
}

TriangleMesh rotate_mesh(const TriangleMesh& mesh, const Mat3& r) {
    TriangleMesh out;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) out.vertices.push_back(r * v);
    out.triangles = mesh.triangles;
    return out;
}

// ---------------------------------------------------------------------------
// Silhouette rendering
// ---------------------------------------------------------------------------

std::vector<float> render_silhouette(const TriangleMesh& mesh, const Mat3& r,
                                     const Vec3& t, int resolution,
                                     double focal) {
    validate_mesh(mesh);
    std::vector<float> image(static_cast<size_t>(resolution) * resolution, 0.0f);
    std::vector<Eigen::Vector2d> projected;
    projected.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) {
        const Vec3 p = r * v + t;
        const double z = std::max(p.z(), 0.05);
        projected.emplace_back(focal * p.x() / z, focal * p.y() / z);
    }
    auto to_pixel = [&](double u) { return (u + 1.0) / 2.0 * resolution - 0.5; };
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector2d &a = projected[tri[0]], &b = projected[tri[1]],
                              &c = projected[tri[2]];
        const double area = (b.x() - a.x()) * (c.y() - a.y()) -
                            (c.x() - a.x()) * (b.y() - a.y());
        if (std::abs(area) < 1e-14) continue;
        const double min_x = std::min({a.x(), b.x(), c.x()});
        const double max_x = std::max({a.x(), b.x(), c.x()});
        const double min_y = std::min({a.y(), b.y(), c.y()});
        const double max_y = std::max({a.y(), b.y(), c.y()});
        const int px0 = std::max(0, static_cast<int>(std::floor(to_pixel(min_x))));
        const int px1 = std::min(resolution - 1,
                                 static_cast<int>(std::ceil(to_pixel(max_x))));
        const int py0 = std::max(0, static_cast<int>(std::floor(to_pixel(min_y))));
        const int py1 = std::min(resolution - 1,
                                 static_cast<int>(std::ceil(to_pixel(max_y))));
        for (int py = py0; py <= py1; ++py)
            for (int px = px0; px <= px1; ++px) {
                const double x = (px + 0.5) / resolution * 2.0 - 1.0;
                const double y = (py + 0.5) / resolution * 2.0 - 1.0;
                const double w0 = ((b.x() - a.x()) * (y - a.y()) -
                                   (x - a.x()) * (b.y() - a.y())) / area;
                const double w1 = ((c.x() - b.x()) * (y - b.y()) -
                                   (x - b.x()) * (c.y() - b.y())) / area;
                const double w2 = ((a.x() - c.x()) * (y - c.y()) -
                                   (x - c.x()) * (a.y() - c.y())) / area;
                if (w0 >= 0 && w1 >= 0 && w2 >= 0) {
                    // Row 0 at the top of the image.
                    const int row = resolution - 1 - py;
                    image[static_cast<size_t>(row) * resolution + px] = 1.0f;
                }
            }
    }
    return image;
}

// ---------------------------------------------------------------------------
// OBJ subset
// ---------------------------------------------------------------------------

TriangleMesh read_obj(const std::string& text) {
    TriangleMesh m;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "v") {
            Vec3 v;
            if (!(ls >> v.x() >> v.y() >> v.z()))
                throw ParseError("bad OBJ vertex at line " + std::to_string(line_no));
            m.vertices.push_back(v);
        } else if (tok == "f") {
            std::vector<int> face;
            std::string ref;
            while (ls >> ref) {
                const size_t slash = ref.find('/');
                const std::string head = slash == std::string::npos
                                             ? ref
                                             : ref.substr(0, slash);
                int idx = 0;
                try {
                    idx = std::stoi(head);
                } catch (const std::exception&) {
                    throw ParseError("bad OBJ face index at line " +
                                     std::to_string(line_no));
                }
                if (idx < 0) idx = static_cast<int>(m.vertices.size()) + idx + 1;
                if (idx < 1 || idx > static_cast<int>(m.vertices.size()))
                    throw ParseError("OBJ face index out of range at line " +
                                     std::to_string(line_no));
                face.push_back(idx - 1);
            }
            if (face.size() < 3)
                throw ParseError("OBJ face with < 3 vertices at line " +
                                 std::to_string(line_no));
            for (size_t i = 1; i + 1 < face.size(); ++i)
                m.triangles.push_back({face[0], face[i], face[i + 1]});
        }
    }
    if (m.triangles.empty()) throw DegenerateMesh("OBJ contains no faces");
    return m;
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_obj(buf.str());
}

std::string write_obj(const TriangleMesh& mesh) {
    std::ostringstream out;
    for (const Vec3& v : mesh.vertices)
        out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    return out.str();
}

}  // namespace posekit
