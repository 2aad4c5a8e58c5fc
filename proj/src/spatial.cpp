#include "microgait/spatial.hpp"

#include <cmath>

namespace microgait {

Eigen::Vector3d rotation_log(const Eigen::Matrix3d& R) {
  const double cos_theta = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta < 1e-12) {
    // First-order: skew part already is the rotation vector.
    return Eigen::Vector3d(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) * 0.5;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi: extract axis from R + I.
    Eigen::Matrix3d A = 0.5 * (R + Eigen::Matrix3d::Identity());
    Eigen::Vector3d axis;
    int k;
    A.diagonal().maxCoeff(&k);
    axis = A.col(k) / std::sqrt(A(k, k));
    axis.normalize();
    // Fix sign against the skew part where it is not degenerate.
    Eigen::Vector3d skew(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    if (skew.dot(axis) < 0.0) axis = -axis;
    return axis * theta;
  }
  Eigen::Vector3d skew(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  return skew * (theta / (2.0 * std::sin(theta)));
}

Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) {
    Eigen::Matrix3d K;
    K << 0, -phi.z(), phi.y(), phi.z(), 0, -phi.x(), -phi.y(), phi.x(), 0;
    return Eigen::Matrix3d::Identity() + K;
  }
  return Eigen::AngleAxisd(theta, phi / theta).toRotationMatrix();
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& R) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    D(2, 2) = -1.0;
    out = svd.matrixU() * D * svd.matrixV().transpose();
  }
  return out;
}

Pose interpolate_pose(const Pose& a, const Pose& b, double s) {
  Pose out;
  out.translation = (1.0 - s) * a.translation + s * b.translation;
  const Eigen::Vector3d phi = rotation_log(a.rotation.transpose() * b.rotation);
  out.rotation = a.rotation * rotation_exp(s * phi);
  return out;
}

Plane best_fit_plane(const std::vector<Eigen::Vector3d>& points,
                     const Eigen::Vector3d& toward_side) {
  if (points.size() < 3) {
    throw DegenerateGeometry("best_fit_plane: fewer than 3 points");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double scale = 0.0;
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - centroid;
    cov += d * d.transpose();
    scale = std::max(scale, d.squaredNorm());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Collinear when the two smallest eigenvalues are both ~0.
  if (scale <= 0.0 || eig.eigenvalues()(1) < 1e-12 * scale) {
    throw DegenerateGeometry("best_fit_plane: collinear points");
  }
  Eigen::Vector3d normal = eig.eigenvectors().col(0).normalized();
  double side = normal.dot(toward_side);
  if (std::abs(side) < 1e-12) side = normal.dot(Eigen::Vector3d::UnitZ());
  if (side < 0.0) normal = -normal;
  return Plane{normal, centroid};
}

Eigen::Quaterniond pose_quaternion(const Pose& p) {
  Eigen::Quaterniond q(p.rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Pose pose_from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
  Pose out;
  out.rotation = q.normalized().toRotationMatrix();
  out.translation = t;
  return out;
}

}  // namespace microgait
