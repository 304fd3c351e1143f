#pragma once

#include <Eigen/Dense>

#include "covi/errors.hpp"

namespace covi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDefaultGravity = 9.80665; // m/s^2
inline constexpr double kDegToRad = 0.017453292519943295;
inline constexpr double kRadToDeg = 57.29577951308232;

// Scalar-first quaternion (w, x, y, z). A unit quaternion acts on vectors
// through the sandwich product: rotate(q, u) = vec(q * u_q * conj(q)),
// so quat_to_rot(q) maps local-frame coordinates to parent-frame coordinates
// when q is the orientation of the local frame.
struct Quat {
    double w{1.0};
    double x{0.0};
    double y{0.0};
    double z{0.0};

    Quat() = default;
    Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat conj() const { return {w, -x, -y, -z}; }

    Quat normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    Vec3 vec() const { return {x, y, z}; }
};

// Hamilton product, scalar-first. Inputs need not be unit quaternions.
inline Quat quat_mul(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quat pure_quat(const Vec3& v) { return {0.0, v.x(), v.y(), v.z()}; }

// vec(q * v_q * conj(q)); for unit q this rotates v from the frame q describes
// into the parent frame.
inline Vec3 quat_rotate(const Quat& q, const Vec3& v) {
    const Quat r = quat_mul(quat_mul(q, pure_quat(v)), q.conj());
    return {r.x, r.y, r.z};
}

// Exponential: rotation by angle |v| about v/|v|.
Quat quat_from_rotvec(const Vec3& v);

// Z-Y-X convention: q = q_z(yaw) * q_y(pitch) * q_x(roll).
Quat quat_from_euler(double roll, double pitch, double yaw);

// Rotation matrix of a unit quaternion (sandwich-product convention).
// Throws std::invalid_argument if |q| deviates from 1 by more than 1e-9.
Mat3 quat_to_rot(const Quat& q);

// Skew matrix in the sign convention used throughout this project:
//   skew(v) = [  0    v_z  -v_y ]
//             [ -v_z   0    v_x ]
//             [  v_y  -v_x   0  ]
// Note skew(v) * u = u x v, the transpose of the common cross-product matrix.
Mat3 skew(const Vec3& v);

// exp of the standard cross-product matrix: rotates by angle |v| about v/|v|.
// Satisfies rodrigues(v) == quat_to_rot(quat_from_rotvec(v)).
Mat3 rodrigues(const Vec3& v);

// Z-Y-X (yaw-pitch-roll): R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rot_from_euler(double roll, double pitch, double yaw);
inline Mat3 rot_from_euler(const Vec3& rpy) { return rot_from_euler(rpy.x(), rpy.y(), rpy.z()); }

// Inverse of rot_from_euler; returns (roll, pitch, yaw).
// Throws DegenerateOrientationError within 1e-6 rad of |pitch| = pi/2.
Vec3 rot_to_euler(const Mat3& O);

// Nearest rotation in Frobenius norm (orthogonal Procrustes), det forced to +1.
// Throws ProjectionFailureError on numerically singular input.
Mat3 project_to_so3(const Mat3& M);

} // namespace covi
