#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "microgait/spatial.hpp"

namespace microgait {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Vector24 = Eigen::Matrix<double, 24, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

enum class Morphology { YPP, RPP };

const char* morphology_name(Morphology m);
Morphology morphology_from_name(const std::string& name);

// One 6-DOF limb: 2-DOF hip, knee, 3-DOF spherical ankle. YPP and RPP differ
// only in the first hip axis; distal chains are identical.
struct LimbSpec {
  Morphology morphology = Morphology::YPP;
  Eigen::Vector3d link_lengths{0.676, 0.806, 0.200};  // m
  Vector6 torque_limits = (Vector6() << 200, 200, 200, 19.94, 19.94, 19.94).finished();
  Vector6 velocity_limits = (Vector6() << 19.4, 19.4, 19.4, 24.18, 24.18, 24.18).finished();
  Eigen::Matrix<double, 6, 2> angle_limits = default_angle_limits();
  Vector6 joint_masses = (Vector6() << 2.93, 2.93, 2.93, 0.48, 0.48, 0.48).finished();
  double link_density = 1.0;  // kg/m

  static Eigen::Matrix<double, 6, 2> default_angle_limits();
  double reach() const { return link_lengths.sum(); }
  double mass() const { return joint_masses.sum() + link_density * link_lengths.sum(); }
};

// Limb indices: 0 = LF, 1 = RF, 2 = LH, 3 = RH. Left is +y, front is +x.
struct RobotModel {
  Eigen::Vector3d base_dimensions{0.70, 0.60, 0.125};  // x, y, z extents (m)
  double base_mass = 200.0;
  std::array<Pose, 4> mount_poses;
  std::array<LimbSpec, 4> limbs;
  Eigen::Matrix3d base_inertia = Eigen::Matrix3d::Zero();

  static RobotModel default_model(Morphology m);
  static RobotModel load(const std::string& json_path);

  double total_mass() const;
};

struct JointState {
  Vector24 q = Vector24::Zero();
  Vector24 dq = Vector24::Zero();
  Vector24 ddq = Vector24::Zero();

  Vector6 limb_q(int limb) const { return q.segment<6>(6 * limb); }
  void set_limb_q(int limb, const Vector6& v) { q.segment<6>(6 * limb) = v; }
};

// World-frame state of every limb joint frame, for kinematics and dynamics.
struct LimbFrames {
  std::array<Pose, 6> frames;          // after each joint rotation
  std::array<Eigen::Vector3d, 6> axes; // world joint axes
  Pose ee;
};

// End-effector pose in base frame.
Pose forward_kinematics(const RobotModel& model, int limb, const Vector6& q_limb);

// All joint frames (base frame). Shared by the Jacobian and dynamics paths.
LimbFrames limb_frames(const RobotModel& model, int limb, const Vector6& q_limb);

// 6x6 geometric Jacobian mapping joint rates to end-effector twist
// [linear; angular] in the base frame.
Matrix6 jacobian(const RobotModel& model, int limb, const Vector6& q_limb);

// sqrt(det(J J')) >= 0.
double manipulability(const RobotModel& model, int limb, const Vector6& q_limb);

enum class IkStatus { Ok, Unreachable, NearSingular, JointLimit };

struct IkResult {
  IkStatus status = IkStatus::Unreachable;
  Vector6 q = Vector6::Zero();
  double position_error = 0.0;
  double orientation_error = 0.0;
  double manipulability = 0.0;

  bool ok() const { return status == IkStatus::Ok; }
};

struct IkOptions {
  int max_iterations = 200;
  double position_tolerance = 1e-8;    // m
  double orientation_tolerance = 1e-8; // rad
  double manipulability_threshold = 1e-3;
  double damping = 1e-3;
};

// Damped least-squares IK from a seed. Target in base frame.
IkResult inverse_kinematics(const RobotModel& model, int limb, const Pose& target,
                            const Vector6& seed, const IkOptions& opts = {});

// Rigid-body decomposition used by COM and inverse-dynamics paths. Bodies
// carry composite point-mass + rod inertia per joint frame.
struct BodyInertia {
  double mass = 0.0;
  Eigen::Vector3d com_local = Eigen::Vector3d::Zero();  // in owning frame
  Eigen::Matrix3d inertia_com = Eigen::Matrix3d::Zero();
};

// body_inertias(limb)[i] belongs to joint frame i of that limb.
std::array<BodyInertia, 6> limb_body_inertias(const LimbSpec& spec);

// Full second-order world-frame state of every joint frame of one limb,
// given base motion. Used by the Newton-Euler dynamics pass.
struct FrameState {
  Pose pose;
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();      // frame origin velocity
  Eigen::Vector3d alpha = Eigen::Vector3d::Zero();  // angular acceleration
  Eigen::Vector3d a = Eigen::Vector3d::Zero();      // frame origin acceleration
};

std::array<FrameState, 6> limb_frame_states(const RobotModel& model, int limb,
                                            const Pose& base_pose, const Twist& base_twist,
                                            const Eigen::Vector3d& base_linear_acc,
                                            const Eigen::Vector3d& base_angular_acc,
                                            const Vector6& q, const Vector6& dq,
                                            const Vector6& ddq);

// Whole-robot COM position, velocity and total mass given a full state.
struct ComState {
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Vector3d com_velocity = Eigen::Vector3d::Zero();
  double total_mass = 0.0;
};

ComState com_state(const RobotModel& model, const Pose& base_pose,
                   const Twist& base_twist, const JointState& joints);

// Linear momentum and angular momentum about the COM, plus the COM itself.
struct MomentumState {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_about_com = Eigen::Vector3d::Zero();
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
};

MomentumState momentum_state(const RobotModel& model, const Pose& base_pose,
                             const Twist& base_twist, const JointState& joints);

}  // namespace microgait
