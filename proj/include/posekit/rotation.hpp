#pragma once

#include <Eigen/Dense>
#include <random>

#include <nlohmann/json_fwd.hpp>

#include "posekit/errors.hpp"

namespace posekit {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Two 3-vectors mapped to a rotation by Gram-Schmidt. Continuous over
/// SO(3), unlike Euler angles or quaternions.
struct SixDRep {
    Vec3 a1;
    Vec3 a2;
};

struct UnitQuaternion {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const;
    UnitQuaternion normalized() const;
};

/// Camera-facing Euler convention (see euler_to_rotation).
struct EulerPose {
    double azimuth = 0.0;
    double elevation = 0.0;
    double inplane = 0.0;
};

inline constexpr double kRotationTol = 1e-9;

/// mᵀm = I and det(m) = 1 within tol (Frobenius norm on the residual).
bool is_rotation(const Mat3& m, double tol = kRotationTol);

Mat3 rotate_x(double angle);
Mat3 rotate_y(double angle);
Mat3 rotate_z(double angle);

/// Angular distance acos((tr(r1 r2ᵀ) - 1) / 2), argument clamped to
/// [-1, 1] so numerical drift never yields NaN. Range [0, pi].
double geodesic_distance(const Mat3& r1, const Mat3& r2);

/// Gram-Schmidt map {a1, a2} -> columns (b1, b2, b3).
/// Throws DegenerateSixD when ‖a1‖ or the orthogonalized remainder of a2
/// falls below 1e-8.
Mat3 sixd_to_rotation(const SixDRep& s);

/// Canonical right-inverse: the first two matrix columns.
SixDRep rotation_to_sixd(const Mat3& r);

Mat3 compose(const Mat3& r1, const Mat3& r2);

Mat3 quat_to_rotation(const UnitQuaternion& q);
UnitQuaternion rotation_to_quat(const Mat3& r);

/// R = Rz(inplane) * Rx(-elevation) * Rz(-azimuth).
Mat3 euler_to_rotation(const EulerPose& e);

/// Haar-uniform unit quaternion via normalized 4D Gaussian draw.
UnitQuaternion random_quaternion(std::mt19937_64& rng);

/// Haar-uniform rotation. RNG state is caller-owned.
Mat3 random_rotation(std::mt19937_64& rng);

// JSON wire format: rotations as row-major 9-element arrays,
// quaternions as [w, x, y, z].
nlohmann::json rotation_to_json(const Mat3& r);
Mat3 rotation_from_json(const nlohmann::json& j);
nlohmann::json quat_to_json(const UnitQuaternion& q);
UnitQuaternion quat_from_json(const nlohmann::json& j);

}  // namespace posekit
