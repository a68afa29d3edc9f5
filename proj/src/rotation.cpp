#include "posekit/rotation.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace posekit {

double UnitQuaternion::norm() const {
    return std::sqrt(w * w + x * x + y * y + z * z);
}

UnitQuaternion UnitQuaternion::normalized() const {
    const double n = norm();
    if (n == 0.0) throw Error("cannot normalize zero quaternion");
    return {w / n, x / n, y / n, z / n};
}

bool is_rotation(const Mat3& m, double tol) {
    const Mat3 residual = m.transpose() * m - Mat3::Identity();
    if (residual.norm() > tol) return false;
    return std::abs(m.determinant() - 1.0) <= tol;
}

Mat3 rotate_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

Mat3 rotate_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

Mat3 rotate_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

double geodesic_distance(const Mat3& r1, const Mat3& r2) {
    // tr(r1 r2ᵀ) is the elementwise dot product of the two matrices.
    const double trace = r1.cwiseProduct(r2).sum();
    const double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

Mat3 sixd_to_rotation(const SixDRep& s) {
    constexpr double eps = 1e-8;
    const double n1 = s.a1.norm();
    if (n1 <= eps) throw DegenerateSixD("sixd_to_rotation: ‖a1‖ too small");
    const Vec3 b1 = s.a1 / n1;
    const Vec3 u = s.a2 - b1.dot(s.a2) * b1;
    const double n2 = u.norm();
    if (n2 <= eps) throw DegenerateSixD("sixd_to_rotation: a2 parallel to a1");
    const Vec3 b2 = u / n2;
    const Vec3 b3 = b1.cross(b2);
    Mat3 r;
    r.col(0) = b1;
    r.col(1) = b2;
    r.col(2) = b3;
    return r;
}

SixDRep rotation_to_sixd(const Mat3& r) {
    return {r.col(0), r.col(1)};
}

Mat3 compose(const Mat3& r1, const Mat3& r2) {
    return r1 * r2;
}

Mat3 quat_to_rotation(const UnitQuaternion& q_in) {
    const UnitQuaternion q = q_in.normalized();
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

UnitQuaternion rotation_to_quat(const Mat3& r) {
    // Shepperd's method: pick the largest of the four squared components.
    const double t0 = 1.0 + r(0, 0) + r(1, 1) + r(2, 2);
    const double t1 = 1.0 + r(0, 0) - r(1, 1) - r(2, 2);
    const double t2 = 1.0 - r(0, 0) + r(1, 1) - r(2, 2);
    const double t3 = 1.0 - r(0, 0) - r(1, 1) + r(2, 2);
    UnitQuaternion q;
    if (t0 >= t1 && t0 >= t2 && t0 >= t3) {
        const double s = 2.0 * std::sqrt(t0);
        q.w = 0.25 * s;
        q.x = (r(2, 1) - r(1, 2)) / s;
        q.y = (r(0, 2) - r(2, 0)) / s;
        q.z = (r(1, 0) - r(0, 1)) / s;
    } else if (t1 >= t2 && t1 >= t3) {
        const double s = 2.0 * std::sqrt(t1);
        q.w = (r(2, 1) - r(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (r(0, 1) + r(1, 0)) / s;
        q.z = (r(0, 2) + r(2, 0)) / s;
    } else if (t2 >= t3) {
        const double s = 2.0 * std::sqrt(t2);
        q.w = (r(0, 2) - r(2, 0)) / s;
        q.x = (r(0, 1) + r(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (r(1, 2) + r(2, 1)) / s;
    } else {
        const double s = 2.0 * std::sqrt(t3);
        q.w = (r(1, 0) - r(0, 1)) / s;
        q.x = (r(0, 2) + r(2, 0)) / s;
        q.y = (r(1, 2) + r(2, 1)) / s;
        q.z = 0.25 * s;
    }
    return q.normalized();
}

Mat3 euler_to_rotation(const EulerPose& e) {
    return rotate_z(e.inplane) * rotate_x(-e.elevation) * rotate_z(-e.azimuth);
}

UnitQuaternion random_quaternion(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    UnitQuaternion q;
    double n = 0.0;
    do {
        q.w = gauss(rng);
        q.x = gauss(rng);
        q.y = gauss(rng);
        q.z = gauss(rng);
        n = q.norm();
    } while (n < 1e-12);
    return q.normalized();
}

Mat3 random_rotation(std::mt19937_64& rng) {
    return quat_to_rotation(random_quaternion(rng));
}

nlohmann::json rotation_to_json(const Mat3& r) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) j.push_back(r(i, k));
    return j;
}

Mat3 rotation_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 9)
        throw ParseError("rotation JSON must be a 9-element array");
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) r(i, k) = j[3 * i + k].get<double>();
    return r;
}

nlohmann::json quat_to_json(const UnitQuaternion& q) {
    return nlohmann::json::array({q.w, q.x, q.y, q.z});
}

UnitQuaternion quat_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4)
        throw ParseError("quaternion JSON must be a 4-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
            j[3].get<double>()};
}

}  // namespace posekit
