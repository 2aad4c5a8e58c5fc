#pragma once

#include <vector>

#include <Eigen/Dense>

#include "microgait/spatial.hpp"

namespace microgait {

enum class GraspCombineMode { MinkowskiSum, Union };

// Per-contact admissible force model: capped linearized friction cone
// combined with an omnidirectional grasp ball.
struct ContactModel {
  double friction_coefficient = 0.5;
  int cone_facets = 8;
  double normal_force_cap = 260.0;   // N
  double grasp_force_radius = 260.0; // N
  // Wrap moment of a gripper closed around the rail: an omnidirectional
  // torque ball per contact. Without it, two-contact phases could not resist
  // any torque about the axis joining the contacts.
  double grasp_torque_radius = 60.0;  // N.m
  GraspCombineMode combine = GraspCombineMode::MinkowskiSum;
};

struct ContactPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero(); // base frame, m
  Pose contact_frame;                                 // z = surface normal
  int limb_index = -1;
};

struct ContactSet {
  std::vector<ContactPoint> contacts;
  ContactModel model;

  bool empty() const { return contacts.empty(); }
};

struct DirectionPair {
  Eigen::Vector3d force_dir = Eigen::Vector3d::UnitX();
  Eigen::Vector3d torque_dir = Eigen::Vector3d::UnitX();
};

// 26-neighborhood unit vectors (all nonzero {-1,0,1}^3 offsets, normalized).
std::vector<Eigen::Vector3d> neighborhood26();

struct ScoreConfig {
  double w_arbitrary = 1.0 / 3.0;
  double w_swing = 1.0 / 3.0;
  double w_base = 1.0 / 3.0;
  double delta_x = 0.1;      // m
  double delta_theta = 0.1;  // rad
  std::vector<DirectionPair> arbitrary_directions = default_arbitrary_directions();

  static std::vector<DirectionPair> default_arbitrary_directions();
};

// Support function of one contact's admissible force set along `direction`
// (unit). Exact: cone support over edge vertices plus the ball radius.
double contact_force_support(const ContactPoint& contact, const ContactModel& model,
                             const Eigen::Vector3d& direction);

// Net force/torque support of the whole contact set about `reference`.
struct NetSupport {
  double force = 0.0;
  double torque = 0.0;
  bool empty_set = false;
};

NetSupport net_support(const ContactSet& set, const Eigen::Vector3d& force_direction,
                       const Eigen::Vector3d& torque_direction,
                       const Eigen::Vector3d& reference = Eigen::Vector3d::Zero());

// Vertex generators of one contact's linearized admissible force set, grouped
// by convex component (one group per Minkowski summand). Shared by the
// membership LP and the test oracles.
std::vector<std::vector<Eigen::Vector3d>> contact_force_generators(const ContactPoint& contact,
                                                                   const ContactModel& model);

// Vertex generators of the per-contact grasp torque ball (26-direction
// polytope); empty when grasp_torque_radius is zero.
std::vector<Eigen::Vector3d> contact_torque_generators(const ContactModel& model);

// Margin sentinel reported for the zero wrench (unbounded scaling).
constexpr double kInfiniteMargin = 1e9;

struct MembershipResult {
  bool feasible = false;
  double margin = 0.0;  // largest uniform scaling of `required` still feasible
  bool empty_set = false;
};

// Eq-style LP membership: can the contacts jointly supply `required`
// (force/torque about its reference point)?
MembershipResult wrench_membership(const ContactSet& set, const Wrench& required);

struct ContactScore {
  double total = 0.0;
  double arbitrary = 0.0;
  double swing = 0.0;
  double base = 0.0;
};

// Weighted min-max contact configuration score. Empty swing/base direction
// sets fall back to the arbitrary set so scores stay comparable across
// intervals with no swing or base motion.
ContactScore contact_config_score(const ContactSet& set, const ScoreConfig& cfg,
                                  const std::vector<DirectionPair>& swing_dirs,
                                  const std::vector<DirectionPair>& base_dirs,
                                  const Eigen::Vector3d& reference = Eigen::Vector3d::Zero());

}  // namespace microgait
