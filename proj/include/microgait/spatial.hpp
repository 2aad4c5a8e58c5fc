#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace microgait {

// Rigid transform in 3D. Rotation kept orthonormal (det +1).
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose Identity() { return Pose{}; }

  Pose inverse() const {
    Pose out;
    out.rotation = rotation.transpose();
    out.translation = -(rotation.transpose() * translation);
    return out;
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const {
    return rotation * point + translation;
  }
};

// Applies b then a.
inline Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

struct Twist {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();    // m/s
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();   // rad/s
};

// 6D force/torque about a stated reference point.
struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();           // N
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();          // N·m
  Eigen::Vector3d reference_point = Eigen::Vector3d::Zero(); // m
};

// Re-expresses a wrench about a new reference point. Force is unchanged;
// torque picks up the cross-product shift.
inline Wrench transform_wrench(const Wrench& w, const Eigen::Vector3d& new_point) {
  Wrench out;
  out.force = w.force;
  out.torque = w.torque + (w.reference_point - new_point).cross(w.force);
  out.reference_point = new_point;
  return out;
}

struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();

  double signed_distance(const Eigen::Vector3d& p) const {
    return normal.dot(p - centroid);
  }
};

struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rotation log map: returns the rotation vector (axis * angle).
Eigen::Vector3d rotation_log(const Eigen::Matrix3d& R);

// Rotation exp map.
Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& phi);

// Re-orthonormalizes a near-orthonormal matrix (nearest rotation via SVD).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& R);

// Geodesic pose interpolation: linear in translation, rotation-vector in
// orientation. s in [0, 1].
Pose interpolate_pose(const Pose& a, const Pose& b, double s);

// Least-squares plane through >= 3 non-collinear points. Normal sign chosen
// toward `toward_side` (falls back to global +z when ambiguous).
Plane best_fit_plane(const std::vector<Eigen::Vector3d>& points,
                     const Eigen::Vector3d& toward_side = Eigen::Vector3d::UnitZ());

Eigen::Quaterniond pose_quaternion(const Pose& p);
Pose pose_from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

}  // namespace microgait
