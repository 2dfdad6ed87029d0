#include "seqgrasp/pose.hpp"

#include <cmath>
#include <stdexcept>

namespace seqgrasp {

bool Pose::rotation_valid(double tol) const {
  Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 rotation_exp(const Vec3& omega) {
  double angle = omega.norm();
  if (angle < 1e-12) {
    return Mat3::Identity() + skew(omega);
  }
  Vec3 axis = omega / angle;
  Mat3 k = skew(axis);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Mat3 rpy_to_rotation(double roll, double pitch, double yaw) {
  Eigen::AngleAxisd rz(yaw, Vec3::UnitZ());
  Eigen::AngleAxisd ry(pitch, Vec3::UnitY());
  Eigen::AngleAxisd rx(roll, Vec3::UnitX());
  return (rz * ry * rx).toRotationMatrix();
}

Mat3 project_rotation(const Mat3& m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("project_rotation: non-finite input matrix");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Two vanishing singular values leave the nearest rotation ill-defined.
  if (sv(1) < 1e-12) {
    throw std::invalid_argument("project_rotation: input is rank-deficient (rank < 2)");
  }
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Vec3 d(1.0, 1.0, (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0);
  return u * d.asDiagonal() * v.transpose();
}

Pose apply_twist(const Pose& x, const Vec6& xi) {
  Pose out;
  out.rotation = rotation_exp(xi.tail<3>()) * x.rotation;
  out.translation = x.translation + xi.head<3>();
  return out;
}

}  // namespace seqgrasp
