#pragma once

#include <vector>

#include "microgait/robot_model.hpp"
#include "microgait/spatial.hpp"
#include "microgait/whole_body.hpp"

namespace microgait {

// Second-order base motion used by the inverse-dynamics pass.
struct BaseAcceleration {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();
};

struct InverseDynamicsResult {
  Vector24 joint_torques = Vector24::Zero();
  Wrench base_reaction;  // net wrench the contacts must supply, about base origin
};

// Recursive Newton-Euler over the floating-base tree with g = 0.
InverseDynamicsResult inverse_dynamics(const RobotModel& model, const Pose& base_pose,
                                       const Twist& base_twist, const BaseAcceleration& base_acc,
                                       const JointState& joints);

struct ControllerGains {
  Vector24 kp = Vector24::Constant(100.0);
  Vector24 kd = Vector24::Constant(20.0);
};

// Position-based torque law: M(q)(ddq_des + Kp e + Kd de) + C(q,dq)dq with
// the gravity term absent. Reduces to inverse_dynamics when e = de = 0.
Vector24 controller_torque(const RobotModel& model, const Pose& base_pose,
                           const Twist& base_twist, const BaseAcceleration& base_acc,
                           const Vector24& q, const Vector24& dq, const Vector24& q_des,
                           const Vector24& dq_des, const Vector24& ddq_des,
                           const ControllerGains& gains);

struct WrenchSample {
  double time = 0.0;
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque_about_com = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque_about_base = Eigen::Vector3d::Zero();
};

// Centered moving average with shrinking windows at the boundaries. A
// constant signal passes through unchanged.
std::vector<WrenchSample> moving_average(const std::vector<WrenchSample>& in, double window,
                                         double rate);

// Whole-body motion-induced wrench: total momentum derivative by central
// finite differences, optionally smoothed by the 0.1 s moving average.
std::vector<WrenchSample> whole_body_motion_wrench(const RobotModel& model,
                                                   const ExecutionTrace& trace,
                                                   double filter_window = 0.1);

// Inertial wrench from limbs in swing, re-referenced to the base origin
// (reaction transferred to the base; zero when all limbs are in stance).
std::vector<WrenchSample> swing_induced_wrench(const RobotModel& model,
                                               const ExecutionTrace& trace,
                                               double filter_window = 0.1);

enum class TrialOutcome { Success, PlanFailure, Instability };

const char* trial_outcome_name(TrialOutcome o);

struct WrenchStats {
  double force_peak = 0.0;
  double force_rms = 0.0;
  double torque_peak = 0.0;
  double torque_rms = 0.0;
};

struct TrialMetrics {
  double normalized_contact_score = 0.0;
  WrenchStats whole_body_wrench;
  WrenchStats swing_wrench;
  double mechanical_work = 0.0;     // J
  double rms_joint_torque = 0.0;    // N·m
  double rms_joint_velocity = 0.0;  // rad/s
  double traversal_time = 0.0;      // s
  TrialOutcome outcome = TrialOutcome::Success;
};

struct ScoreInterval {
  double duration = 0.0;
  double score = 0.0;
};

// Streaming accumulator so multi-stride trials fold stride traces into one
// set of trial-level metrics without retaining every sample.
class MetricsAccumulator {
 public:
  void add_trace(const RobotModel& model, const ExecutionTrace& trace,
                 double filter_window = 0.1);
  void add_score_interval(const ScoreInterval& interval);

  TrialMetrics finalize(TrialOutcome outcome) const;
  double elapsed() const { return time_; }

 private:
  struct ChannelAcc {
    double peak_f = 0.0, peak_t = 0.0, sum_f2 = 0.0, sum_t2 = 0.0;
    long n = 0;
  };
  void fold(ChannelAcc& acc, const std::vector<WrenchSample>& series);

  ChannelAcc whole_body_;
  ChannelAcc swing_;
  double work_ = 0.0;
  double sum_tau2_ = 0.0;
  double sum_dq2_ = 0.0;
  long joint_samples_ = 0;
  double time_ = 0.0;
  double score_weighted_ = 0.0;
  double score_time_ = 0.0;
};

// One-shot variant for a single complete trace.
TrialMetrics compute_metrics(const RobotModel& model, const ExecutionTrace& trace,
                             const std::vector<ScoreInterval>& score_records,
                             TrialOutcome outcome = TrialOutcome::Success);

}  // namespace microgait
