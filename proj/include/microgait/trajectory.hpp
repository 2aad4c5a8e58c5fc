#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "microgait/gait_planner.hpp"
#include "microgait/spatial.hpp"

namespace microgait {

struct DurationTooShort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDuration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Fraction of the duration spent in each quintic blend of the trapezoid.
constexpr double kBlendFraction = 0.25;

// C2 arc-length profile: quintic-blended trapezoid from rest to rest.
class ScalarProfile {
 public:
  ScalarProfile() = default;

  // Throws DurationTooShort when the cruise speed needed exceeds v_max.
  static ScalarProfile make(double length, double duration, double v_max,
                            double blend_fraction = kBlendFraction);

  static double min_duration(double length, double v_max,
                             double blend_fraction = kBlendFraction) {
    return length / (v_max * (1.0 - blend_fraction));
  }

  struct Sample {
    double position = 0.0;
    double velocity = 0.0;
    double acceleration = 0.0;
  };
  Sample eval(double t) const;

  double duration() const { return duration_; }
  double length() const { return length_; }
  double cruise_speed() const { return cruise_speed_; }

 private:
  double duration_ = 0.0;
  double length_ = 0.0;
  double cruise_speed_ = 0.0;
  double blend_time_ = 0.0;
};

struct PoseSample {
  Pose pose;
  Twist twist;
  Eigen::Vector3d linear_acceleration = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_acceleration = Eigen::Vector3d::Zero();
};

// Geodesic pose path (linear translation, rotation-vector orientation)
// reparameterized by the blended trapezoid. Boundary twist/acceleration zero.
class BaseTrajectory {
 public:
  BaseTrajectory() = default;
  BaseTrajectory(const Pose& start, const Pose& goal, double duration, double v_max);

  PoseSample sample(double t) const;
  double duration() const { return profile_.duration(); }
  const Pose& start() const { return start_; }
  const Pose& goal() const { return goal_; }

 private:
  Pose start_;
  Pose goal_;
  Eigen::Vector3d delta_p_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d phi_ = Eigen::Vector3d::Zero();
  double param_length_ = 0.0;
  ScalarProfile profile_;
};

// Geometry of the five-stage swing. Stages sigma_2..sigma_4 carry arc length;
// sigma_1/sigma_5 are gripper holds at the endpoint poses.
class SwingPath {
 public:
  SwingPath() = default;
  // rotation_weight converts orientation travel (rad) to metres for the
  // combined metric used in stage-time proportioning.
  SwingPath(const Pose& current_contact, const Pose& target_contact, double clearance,
            double rotation_weight = 1.0);

  // Stage arc lengths (sigma_2, sigma_3, sigma_4) in the combined metric.
  const std::array<double, 3>& stage_lengths() const { return stage_lengths_; }
  double total_length() const { return total_length_; }
  double clearance() const { return clearance_; }
  const Pose& current_contact() const { return current_; }
  const Pose& target_contact() const { return target_; }

  // Pose at combined arc length s in [0, total_length]; stage_out gets
  // 2, 3, or 4. Translation is C1: the corners between stages are rounded
  // by Hermite blends so the path can be tracked at speed without
  // acceleration impulses.
  Pose pose_at_arc(double s, int* stage_out = nullptr) const;

 private:
  Pose pose_at_arc_raw(double s, int* stage_out) const;
  Eigen::Vector3d raw_translation(double s) const;
  double corner_blend_radius() const;
  Pose pose_sigma2(double u) const;
  Pose pose_sigma3(double u) const;
  Pose pose_sigma4(double u) const;
  double sigma3_param_for_arc(double s3) const;

  Pose current_;
  Pose target_;
  double clearance_ = 0.0;
  double rotation_weight_ = 1.0;
  std::array<double, 3> stage_lengths_{};
  double total_length_ = 0.0;
  std::vector<double> sigma3_cumlen_;  // combined-metric lookup over u
};

// Swing path with quintic time parameterization: one quintic arc-length law
// spans sigma_2 through sigma_4 with zero velocity and acceleration at both
// ends; gripper stages hold pose.
class TimedSwing {
 public:
  TimedSwing() = default;
  TimedSwing(SwingPath path, double total_duration, double release_duration,
             double grasp_duration);

  struct Sample {
    Pose pose;
    Twist twist;
    Eigen::Vector3d linear_acceleration = Eigen::Vector3d::Zero();
    Eigen::Vector3d angular_acceleration = Eigen::Vector3d::Zero();
    int stage = 1;  // 1..5
  };
  Sample sample(double t) const;

  double duration() const { return total_duration_; }
  double motion_duration() const { return motion_duration_; }
  const SwingPath& path() const { return path_; }

  // Proportional-to-arc-length split of the motion time over sigma_2..4.
  std::array<double, 3> stage_durations() const;

 private:
  SwingPath path_;
  double total_duration_ = 0.0;
  double release_duration_ = 0.0;
  double grasp_duration_ = 0.0;
  double motion_duration_ = 0.0;
};

// Whole-stride trajectory: base motion plus per-limb timed swings placed on
// the schedule. Limbs outside their swing window hold their grasp pose.
struct StrideTrajectory {
  BaseTrajectory base;
  std::array<TimedSwing, 4> swings;      // indexed by limb
  std::array<Pose, 4> current_contacts;  // world grasp poses at stride start
  std::array<Pose, 4> target_contacts;
  SwingSchedule schedule;

  double duration() const { return schedule.stride_duration; }

  struct LimbSample {
    Pose pose;  // world end-effector target
    Twist twist;
    bool in_swing = false;
    int stage = 0;  // 0 = stance, otherwise 1..5
  };

  PoseSample sample_base(double t) const;
  LimbSample sample_limb(int limb, double t) const;
};

// Builds the per-limb timed swings for a schedule.
StrideTrajectory build_stride_trajectory(const Pose& base_start, const Pose& base_goal,
                                         const std::array<Pose, 4>& current_contacts,
                                         const std::array<Pose, 4>& target_contacts,
                                         const SwingSchedule& schedule, const GaitParams& params);

// CSV export: t, base pose, per-limb end-effector pose and stage labels.
std::string stride_trajectory_csv(const StrideTrajectory& traj, double dt);

}  // namespace microgait
