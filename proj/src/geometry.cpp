#include "covi/geometry.hpp"

#include <cmath>

namespace covi {

Quat quat_from_rotvec(const Vec3& v) {
    const double angle = v.norm();
    if (angle < 1e-12) {
        // Second-order series keeps the result unit to machine precision.
        const Quat q{1.0 - angle * angle / 8.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z()};
        return q.normalized();
    }
    const double half = 0.5 * angle;
    const double s = std::sin(half) / angle;
    return {std::cos(half), s * v.x(), s * v.y(), s * v.z()};
}

Quat quat_from_euler(double roll, double pitch, double yaw) {
    const Quat qx{std::cos(0.5 * roll), std::sin(0.5 * roll), 0.0, 0.0};
    const Quat qy{std::cos(0.5 * pitch), 0.0, std::sin(0.5 * pitch), 0.0};
    const Quat qz{std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)};
    return quat_mul(quat_mul(qz, qy), qx);
}

Mat3 quat_to_rot(const Quat& q) {
    if (std::abs(q.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("quat_to_rot: quaternion norm deviates from 1 by more than 1e-9");
    }
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

Mat3 skew(const Vec3& v) {
    Mat3 S;
    S << 0.0, v.z(), -v.y(),
        -v.z(), 0.0, v.x(),
        v.y(), -v.x(), 0.0;
    return S;
}

Mat3 rodrigues(const Vec3& v) {
    const double angle = v.norm();
    const Mat3 K = skew(v).transpose(); // standard cross-product matrix
    if (angle < 1e-12) {
        return Mat3::Identity() + K + 0.5 * K * K;
    }
    const double a = std::sin(angle) / angle;
    const double b = (1.0 - std::cos(angle)) / (angle * angle);
    return Mat3::Identity() + a * K + b * K * K;
}

Mat3 rot_from_euler(double roll, double pitch, double yaw) {
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    Mat3 R;
    R << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
        sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
        -sp, cp * sr, cp * cr;
    return R;
}

Vec3 rot_to_euler(const Mat3& O) {
    const double sp = -O(2, 0);
    if (std::abs(sp) > std::sin(M_PI / 2.0 - 1e-6)) {
        throw DegenerateOrientationError("rot_to_euler: pitch within 1e-6 rad of gimbal lock");
    }
    const double pitch = std::asin(sp);
    const double roll = std::atan2(O(2, 1), O(2, 2));
    const double yaw = std::atan2(O(1, 0), O(0, 0));
    return {roll, pitch, yaw};
}

Mat3 project_to_so3(const Mat3& M) {
    if (!M.allFinite()) {
        throw ProjectionFailureError("project_to_so3: non-finite input");
    }
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues()(2);
    const double smax = svd.singularValues()(0);
    if (!(smax > 0.0) || smin < 1e-12 * smax) {
        throw ProjectionFailureError("project_to_so3: numerically singular input");
    }
    Mat3 R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0.0) {
        Mat3 D = Mat3::Identity();
        D(2, 2) = -1.0;
        R = svd.matrixU() * D * svd.matrixV().transpose();
    }
    return R;
}

} // namespace covi
