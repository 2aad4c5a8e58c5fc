#pragma once

#include <optional>
#include <string>
#include <vector>

#include "microgait/contact_wrench.hpp"
#include "microgait/environment.hpp"
#include "microgait/gait_planner.hpp"
#include "microgait/robot_model.hpp"
#include "microgait/trajectory.hpp"

namespace microgait {

struct RobotState {
  Pose base_pose;
  Twist base_twist;
  JointState joints;
  std::array<int, 4> attachment{-1, -1, -1, -1};  // anchor index, -1 = free
  std::array<Pose, 4> contact_pose;               // world grasp pose when attached
  double time = 0.0;
};

struct TraceSample {
  double time = 0.0;
  Pose base_pose;
  Twist base_twist;
  Eigen::Vector3d base_linear_acceleration = Eigen::Vector3d::Zero();
  Eigen::Vector3d base_angular_acceleration = Eigen::Vector3d::Zero();
  Vector24 q = Vector24::Zero();
  Vector24 dq = Vector24::Zero();
  Vector24 ddq = Vector24::Zero();
  Vector24 tau = Vector24::Zero();
  std::array<bool, 4> attached{true, true, true, true};
  std::array<Pose, 4> contact_pose;  // valid where attached
  std::array<int, 4> stage{0, 0, 0, 0};
};

struct TraceEvent {
  double time = 0.0;
  std::string type;  // "release", "grasp", "monitor_pause", "limit_violation", ...
  int limb = -1;
  std::string detail;
};

struct ExecutionTrace {
  double rate = 1000.0;  // Hz
  std::vector<TraceSample> samples;
  std::vector<TraceEvent> events;
  bool paused = false;
  std::string pause_cause;
};

enum class StabilityStatus { Ok, GraspRisk, WrenchInfeasible };

struct MonitorThresholds {
  double proximity = 0.002;       // m
  double margin = 1.05;           // membership margin floor
  double period = 0.05;           // s between monitor evaluations
};

// Grasp proximity and wrench-membership check for one instant.
StabilityStatus monitor_stability(const RobotModel& model, const RobotState& state,
                                  const Wrench& estimated_wrench, const ContactSet& contacts,
                                  const MonitorThresholds& thresholds);

struct CoordinationFailure {
  FailureInfo info;
  std::string detail;
};

struct CoordinationResult {
  bool ok = false;
  CoordinationFailure failure;
  std::vector<Vector24> q_samples;  // playback-rate joint trajectory
  double dt = 0.0;
};

// Key-stage IK first (swing-phase boundaries for every limb), then dense IK
// at the playback rate with warm-started seeds.
CoordinationResult coordinate_stride(const RobotModel& model, const StrideGoal& goal,
                                     const StrideTrajectory& trajectory,
                                     const RobotState& start_state, double rate,
                                     const IkOptions& ik_opts = {});

struct ExecutionConfig {
  double rate = 1000.0;  // Hz
  MonitorThresholds monitor;
  ContactModel contact_model;
  ScoreConfig score_config;
  bool hard_fail_on_limit_violation = false;
  bool monitor_enabled = true;
};

// Kinematic playback under perfect tracking: updates attachments on gripper
// events, computes inverse-dynamics torques, evaluates the monitor, and logs
// limit violations. Truncates with a pause event on monitor trips.
ExecutionTrace execute_stride(const RobotModel& model, const CoordinationResult& coordination,
                              const StrideTrajectory& trajectory, const RobotState& start_state,
                              const ExecutionConfig& config);

// State advanced to the end of a (possibly truncated) trace.
RobotState state_after(const RobotModel& model, const ExecutionTrace& trace,
                       const RobotState& start_state, const StrideTrajectory& trajectory);

// Contact set (base frame, torque reference = base origin) at one sample.
ContactSet contact_set_at(const TraceSample& sample, const ContactModel& model);

// Trace serialization: CSV samples or compact binary, plus a JSON sidecar of
// events and config.
void save_trace_csv(const ExecutionTrace& trace, const std::string& path);
void save_trace_binary(const ExecutionTrace& trace, const std::string& path);
std::string trace_events_json(const ExecutionTrace& trace);

}  // namespace microgait
