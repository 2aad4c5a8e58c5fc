#include "microgait/trajectory.hpp"

#include <cmath>
#include <sstream>

namespace microgait {

namespace {

// Quintic smoothstep and derivatives: h(0)=0, h(1)=1, h'=h''=0 at both ends.
double smooth5(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smooth5_d(double u) { return 30.0 * u * u * (u - 1.0) * (u - 1.0); }
double smooth5_dd(double u) { return 60.0 * u * (2.0 * u * u - 3.0 * u + 1.0); }
// Integral of smooth5 from 0 to u; equals 0.5 at u = 1.
double smooth5_int(double u) {
  return u * u * u * u * (2.5 + u * (-3.0 + u));
}

}  // namespace

ScalarProfile ScalarProfile::make(double length, double duration, double v_max,
                                  double blend_fraction) {
  if (duration <= 0.0) throw DurationTooShort("profile duration must be positive");
  ScalarProfile p;
  p.duration_ = duration;
  p.length_ = length;
  p.blend_time_ = blend_fraction * duration;
  if (length <= 0.0) return p;
  p.cruise_speed_ = length / (duration - p.blend_time_);
  if (p.cruise_speed_ > v_max * (1.0 + 1e-9)) {
    throw DurationTooShort("duration below minimum achievable under v_max");
  }
  return p;
}

ScalarProfile::Sample ScalarProfile::eval(double t) const {
  Sample out;
  if (length_ <= 0.0) return out;
  t = std::clamp(t, 0.0, duration_);
  const double tb = blend_time_;
  const double vc = cruise_speed_;
  if (t < tb) {
    const double u = t / tb;
    out.position = vc * tb * smooth5_int(u);
    out.velocity = vc * smooth5(u);
    out.acceleration = vc * smooth5_d(u) / tb;
  } else if (t <= duration_ - tb) {
    out.position = vc * tb * 0.5 + vc * (t - tb);
    out.velocity = vc;
    out.acceleration = 0.0;
  } else {
    const double u = (duration_ - t) / tb;
    out.position = length_ - vc * tb * smooth5_int(u);
    out.velocity = vc * smooth5(u);
    out.acceleration = -vc * smooth5_d(u) / tb;
  }
  return out;
}

BaseTrajectory::BaseTrajectory(const Pose& start, const Pose& goal, double duration,
                               double v_max)
    : start_(start), goal_(goal) {
  delta_p_ = goal.translation - start.translation;
  phi_ = rotation_log(start.rotation.transpose() * goal.rotation);
  param_length_ = std::max(delta_p_.norm(), phi_.norm());
  double v_max_eff = std::numeric_limits<double>::infinity();
  if (delta_p_.norm() > 1e-12) v_max_eff = v_max * param_length_ / delta_p_.norm();
  profile_ = ScalarProfile::make(param_length_, duration, v_max_eff);
}

PoseSample BaseTrajectory::sample(double t) const {
  PoseSample out;
  if (param_length_ <= 1e-12) {
    out.pose = start_;
    return out;
  }
  const auto s = profile_.eval(t);
  const double sigma = s.position / param_length_;
  out.pose = interpolate_pose(start_, goal_, sigma);
  const double d_sigma = s.velocity / param_length_;
  const double dd_sigma = s.acceleration / param_length_;
  out.twist.linear = delta_p_ * d_sigma;
  out.twist.angular = out.pose.rotation * phi_ * d_sigma;
  out.linear_acceleration = delta_p_ * dd_sigma;
  out.angular_acceleration = out.pose.rotation * phi_ * dd_sigma;
  return out;
}

SwingPath::SwingPath(const Pose& current_contact, const Pose& target_contact, double clearance,
                     double rotation_weight)
    : current_(current_contact),
      target_(target_contact),
      clearance_(clearance),
      rotation_weight_(rotation_weight) {
  if (clearance <= 0.0) throw std::invalid_argument("swing clearance must be positive");
  stage_lengths_[0] = clearance;
  stage_lengths_[2] = clearance;

  // Combined-metric length of sigma_3: translation polyline plus weighted
  // rotation travel, tabulated for arc-length inversion.
  constexpr int kSamples = 128;
  sigma3_cumlen_.assign(kSamples + 1, 0.0);
  const double rot_angle =
      rotation_log(current_.rotation.transpose() * target_.rotation).norm();
  Eigen::Vector3d prev = pose_sigma3(0.0).translation;
  for (int i = 1; i <= kSamples; ++i) {
    const double u = static_cast<double>(i) / kSamples;
    const Eigen::Vector3d p = pose_sigma3(u).translation;
    sigma3_cumlen_[i] = sigma3_cumlen_[i - 1] + (p - prev).norm() +
                        rotation_weight_ * rot_angle / kSamples;
    prev = p;
  }
  stage_lengths_[1] = sigma3_cumlen_.back();
  total_length_ = stage_lengths_[0] + stage_lengths_[1] + stage_lengths_[2];
}

Pose SwingPath::pose_sigma2(double u) const {
  Pose out = current_;
  out.translation += u * clearance_ * current_.rotation.col(2);
  return out;
}

Pose SwingPath::pose_sigma3(double u) const {
  Pose out;
  const Eigen::Vector3d phi = rotation_log(current_.rotation.transpose() * target_.rotation);
  out.rotation = current_.rotation * rotation_exp(u * phi);
  out.translation = (1.0 - u) * current_.translation + u * target_.translation +
                    out.rotation * Eigen::Vector3d(0.0, 0.0, clearance_);
  return out;
}

Pose SwingPath::pose_sigma4(double u) const {
  Pose out = target_;
  out.translation += (1.0 - u) * clearance_ * target_.rotation.col(2);
  return out;
}

double SwingPath::sigma3_param_for_arc(double s3) const {
  const auto& cum = sigma3_cumlen_;
  if (cum.back() <= 0.0) return 0.0;
  s3 = std::clamp(s3, 0.0, cum.back());
  const auto it = std::lower_bound(cum.begin(), cum.end(), s3);
  if (it == cum.begin()) return 0.0;
  const size_t i = static_cast<size_t>(it - cum.begin());
  const double seg = cum[i] - cum[i - 1];
  const double frac = seg > 0.0 ? (s3 - cum[i - 1]) / seg : 0.0;
  return (static_cast<double>(i - 1) + frac) / (cum.size() - 1);
}

Pose SwingPath::pose_at_arc_raw(double s, int* stage_out) const {
  s = std::clamp(s, 0.0, total_length_);
  const double l2 = stage_lengths_[0];
  const double l3 = stage_lengths_[1];
  if (s <= l2) {
    if (stage_out) *stage_out = 2;
    return pose_sigma2(l2 > 0.0 ? s / l2 : 1.0);
  }
  if (s <= l2 + l3 && l3 > 0.0) {
    if (stage_out) *stage_out = 3;
    return pose_sigma3(sigma3_param_for_arc(s - l2));
  }
  if (stage_out) *stage_out = 4;
  const double l4 = stage_lengths_[2];
  return pose_sigma4(l4 > 0.0 ? (s - l2 - l3) / l4 : 1.0);
}

Eigen::Vector3d SwingPath::raw_translation(double s) const {
  return pose_at_arc_raw(s, nullptr).translation;
}

double SwingPath::corner_blend_radius() const {
  // Half the clearance, but never into the neighbouring corner's window.
  return std::min(0.5 * stage_lengths_[0], 0.45 * stage_lengths_[1]);
}

Pose SwingPath::pose_at_arc(double s, int* stage_out) const {
  s = std::clamp(s, 0.0, total_length_);
  Pose out = pose_at_arc_raw(s, stage_out);

  // The raw path is only C0 where the stages meet; round each corner with a
  // cubic Hermite over a window of +-r so the tracked joint motion carries
  // no velocity discontinuity (which playback differentiation would turn
  // into an impulsive phantom wrench).
  const double r = corner_blend_radius();
  if (r <= 1e-9) return out;
  const std::array<double, 2> corners = {stage_lengths_[0],
                                         stage_lengths_[0] + stage_lengths_[1]};
  for (const double c : corners) {
    const double d = s - c;
    if (std::abs(d) >= r) continue;
    // Window-edge positions and tangents from the raw path; the finite
    // difference stays inside one analytic segment, so the blend matches
    // position and slope at the edges to FD precision.
    const double h = std::min(1e-6 * total_length_, 0.25 * r);
    const Eigen::Vector3d pa = raw_translation(c - r);
    const Eigen::Vector3d pb = raw_translation(c + r);
    const Eigen::Vector3d ta =
        (raw_translation(c - r + h) - raw_translation(c - r - h)) / (2.0 * h);
    const Eigen::Vector3d tb =
        (raw_translation(c + r + h) - raw_translation(c + r - h)) / (2.0 * h);
    const double u = (d + r) / (2.0 * r);
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    const double h10 = u3 - 2.0 * u2 + u;
    const double h01 = -2.0 * u3 + 3.0 * u2;
    const double h11 = u3 - u2;
    out.translation =
        h00 * pa + h10 * (2.0 * r) * ta + h01 * pb + h11 * (2.0 * r) * tb;
    break;
  }
  return out;
}

TimedSwing::TimedSwing(SwingPath path, double total_duration, double release_duration,
                       double grasp_duration)
    : path_(std::move(path)),
      total_duration_(total_duration),
      release_duration_(release_duration),
      grasp_duration_(grasp_duration) {
  motion_duration_ = total_duration - release_duration - grasp_duration;
  if (motion_duration_ <= 0.0) {
    throw InsufficientDuration("swing duration does not cover gripper stages");
  }
}

std::array<double, 3> TimedSwing::stage_durations() const {
  std::array<double, 3> out{};
  const double L = path_.total_length();
  if (L <= 0.0) return out;
  for (int i = 0; i < 3; ++i) {
    out[i] = motion_duration_ * path_.stage_lengths()[i] / L;
  }
  return out;
}

TimedSwing::Sample TimedSwing::sample(double t) const {
  if (t < -1e-12 || t > total_duration_ + 1e-12) {
    throw OutOfRange("swing sample time outside [0, duration]");
  }
  t = std::clamp(t, 0.0, total_duration_);
  Sample out;
  if (t <= release_duration_) {
    out.pose = path_.current_contact();
    out.stage = 1;
    return out;
  }
  if (t >= total_duration_ - grasp_duration_) {
    out.pose = path_.target_contact();
    out.stage = 5;
    return out;
  }
  const double L = path_.total_length();
  const double u = (t - release_duration_) / motion_duration_;
  const double s = L * smooth5(u);
  const double ds = L * smooth5_d(u) / motion_duration_;
  const double dds = L * smooth5_dd(u) / (motion_duration_ * motion_duration_);

  int stage = 2;
  out.pose = path_.pose_at_arc(s, &stage);
  out.stage = stage;

  // Spatial derivatives along the path by central differences in arc length.
  const double h = std::max(1e-6 * L, 1e-9);
  const Pose pm = path_.pose_at_arc(std::max(0.0, s - h));
  const Pose pp = path_.pose_at_arc(std::min(L, s + h));
  const double span = std::min(L, s + h) - std::max(0.0, s - h);
  if (span > 0.0) {
    const Eigen::Vector3d dp = (pp.translation - pm.translation) / span;
    const Eigen::Vector3d ddp =
        (pp.translation - 2.0 * out.pose.translation + pm.translation) / (h * h);
    const Eigen::Vector3d w_plus =
        rotation_log(pp.rotation * out.pose.rotation.transpose()) / h;
    const Eigen::Vector3d w_minus =
        rotation_log(out.pose.rotation * pm.rotation.transpose()) / h;
    const Eigen::Vector3d w_s = 0.5 * (w_plus + w_minus);
    const Eigen::Vector3d dw_s = (w_plus - w_minus) / h;

    out.twist.linear = dp * ds;
    out.twist.angular = w_s * ds;
    out.linear_acceleration = dp * dds + ddp * ds * ds;
    out.angular_acceleration = w_s * dds + dw_s * ds * ds;
  }
  return out;
}

PoseSample StrideTrajectory::sample_base(double t) const {
  if (t < -1e-12 || t > duration() + 1e-12) {
    throw OutOfRange("stride sample time outside [0, duration]");
  }
  return base.sample(std::clamp(t, 0.0, duration()));
}

StrideTrajectory::LimbSample StrideTrajectory::sample_limb(int limb, double t) const {
  if (t < -1e-12 || t > duration() + 1e-12) {
    throw OutOfRange("stride sample time outside [0, duration]");
  }
  t = std::clamp(t, 0.0, duration());
  LimbSample out;
  const double ts = schedule.start_time[limb];
  const double te = schedule.end_time[limb];
  if (t < ts) {
    out.pose = current_contacts[limb];
    return out;
  }
  if (t > te) {
    out.pose = target_contacts[limb];
    return out;
  }
  const auto s = swings[limb].sample(t - ts);
  out.pose = s.pose;
  out.twist = s.twist;
  out.in_swing = true;
  out.stage = s.stage;
  return out;
}

StrideTrajectory build_stride_trajectory(const Pose& base_start, const Pose& base_goal,
                                         const std::array<Pose, 4>& current_contacts,
                                         const std::array<Pose, 4>& target_contacts,
                                         const SwingSchedule& schedule,
                                         const GaitParams& params) {
  StrideTrajectory traj;
  traj.base = BaseTrajectory(base_start, base_goal, schedule.stride_duration,
                             params.base_speed_max);
  traj.current_contacts = current_contacts;
  traj.target_contacts = target_contacts;
  traj.schedule = schedule;
  for (int limb = 0; limb < 4; ++limb) {
    SwingPath path(current_contacts[limb], target_contacts[limb], params.ee_clearance);
    traj.swings[limb] = TimedSwing(path, schedule.end_time[limb] - schedule.start_time[limb],
                                   params.gripper_release_duration,
                                   params.gripper_grasp_duration);
  }
  return traj;
}

std::string stride_trajectory_csv(const StrideTrajectory& traj, double dt) {
  std::ostringstream os;
  os << "t,base_x,base_y,base_z,base_qw,base_qx,base_qy,base_qz";
  for (int l = 0; l < 4; ++l) {
    os << ",ee" << l << "_x,ee" << l << "_y,ee" << l << "_z,ee" << l << "_stage";
  }
  os << "\n";
  for (double t = 0.0; t <= traj.duration() + 1e-12; t += dt) {
    const double tc = std::min(t, traj.duration());
    const auto b = traj.sample_base(tc);
    const Eigen::Quaterniond q = pose_quaternion(b.pose);
    os << tc << "," << b.pose.translation.x() << "," << b.pose.translation.y() << ","
       << b.pose.translation.z() << "," << q.w() << "," << q.x() << "," << q.y() << ","
       << q.z();
    for (int l = 0; l < 4; ++l) {
      const auto s = traj.sample_limb(l, tc);
      os << "," << s.pose.translation.x() << "," << s.pose.translation.y() << ","
         << s.pose.translation.z() << "," << s.stage;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace microgait
