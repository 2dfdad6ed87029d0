#pragma once

#include <Eigen/Dense>

namespace seqgrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Rigid transform (rotation + translation), meters and radians throughout.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }

  Pose compose(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// True when the rotation block is orthonormal with det +1 within tol.
  bool rotation_valid(double tol = 1e-6) const;
};

Mat3 skew(const Vec3& v);

/// Rodrigues exponential of a rotation vector.
Mat3 rotation_exp(const Vec3& omega);

/// Roll/pitch/yaw (extrinsic x-y-z) to rotation matrix, URDF convention.
Mat3 rpy_to_rotation(double roll, double pitch, double yaw);

/// Frobenius-nearest rotation matrix via SVD, det forced to +1.
/// Throws std::invalid_argument for non-finite or rank<2 input.
Mat3 project_rotation(const Mat3& m);

/// Twist chart used for pose gradients and MCMC moves: xi = (v, omega)
/// applied to pose X as  R' = exp(omega) R,  t' = t + v.  The rotation acts
/// about the frame's own origin, so a point y attached to X moves by
/// dv + domega x (y - t) to first order.
Pose apply_twist(const Pose& x, const Vec6& xi);

}  // namespace seqgrasp
