#include "microgait/dynamics_eval.hpp"

#include <cmath>

namespace microgait {

const char* trial_outcome_name(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::Success: return "success";
    case TrialOutcome::PlanFailure: return "plan_failure";
    case TrialOutcome::Instability: return "instability";
  }
  return "?";
}

namespace {

struct BodyState {
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();    // world
  Eigen::Vector3d a_com = Eigen::Vector3d::Zero();  // world
  Eigen::Vector3d inertial_force = Eigen::Vector3d::Zero();
  Eigen::Vector3d inertial_torque_com = Eigen::Vector3d::Zero();
};

BodyState body_state(const BodyInertia& b, const FrameState& f) {
  BodyState out;
  out.mass = b.mass;
  const Eigen::Matrix3d R = f.pose.rotation;
  const Eigen::Vector3d c_off = R * b.com_local;
  out.com = f.pose.translation + c_off;
  out.a_com = f.a + f.alpha.cross(c_off) + f.omega.cross(f.omega.cross(c_off));
  out.inertial_force = b.mass * out.a_com;
  const Eigen::Matrix3d I_w = R * b.inertia_com * R.transpose();
  out.inertial_torque_com = I_w * f.alpha + f.omega.cross(I_w * f.omega);
  return out;
}

}  // namespace

InverseDynamicsResult inverse_dynamics(const RobotModel& model, const Pose& base_pose,
                                       const Twist& base_twist, const BaseAcceleration& base_acc,
                                       const JointState& joints) {
  InverseDynamicsResult out;
  out.base_reaction.reference_point = base_pose.translation;

  // Base body inertial wrench (base COM taken at the base origin).
  {
    const Eigen::Matrix3d I_w =
        base_pose.rotation * model.base_inertia * base_pose.rotation.transpose();
    out.base_reaction.force += model.base_mass * base_acc.linear;
    out.base_reaction.torque +=
        I_w * base_acc.angular + base_twist.angular.cross(I_w * base_twist.angular);
  }

  for (int limb = 0; limb < 4; ++limb) {
    const auto frames = limb_frame_states(model, limb, base_pose, base_twist, base_acc.linear,
                                          base_acc.angular, joints.q.segment<6>(6 * limb),
                                          joints.dq.segment<6>(6 * limb),
                                          joints.ddq.segment<6>(6 * limb));
    const auto inertias = limb_body_inertias(model.limbs[limb]);
    std::array<BodyState, 6> bodies;
    for (int i = 0; i < 6; ++i) bodies[i] = body_state(inertias[i], frames[i]);

    // World joint axes and origins, expressed via the base pose.
    const LimbFrames kf = [&] {
      LimbFrames f = limb_frames(model, limb, joints.q.segment<6>(6 * limb));
      for (auto& fr : f.frames) fr = base_pose * fr;
      f.ee = base_pose * f.ee;
      for (auto& ax : f.axes) ax = base_pose.rotation * ax;
      return f;
    }();

    // Joint torque i balances the inertial wrench of everything distal to it.
    for (int i = 0; i < 6; ++i) {
      Eigen::Vector3d torque = Eigen::Vector3d::Zero();
      const Eigen::Vector3d& joint_origin = kf.frames[i].translation;
      for (int b = i; b < 6; ++b) {
        if (bodies[b].mass <= 0.0) continue;
        torque += (bodies[b].com - joint_origin).cross(bodies[b].inertial_force) +
                  bodies[b].inertial_torque_com;
      }
      out.joint_torques(6 * limb + i) = kf.axes[i].dot(torque);
    }

    for (const auto& b : bodies) {
      if (b.mass <= 0.0) continue;
      out.base_reaction.force += b.inertial_force;
      out.base_reaction.torque += (b.com - base_pose.translation).cross(b.inertial_force) +
                                  b.inertial_torque_com;
    }
  }
  return out;
}

Vector24 controller_torque(const RobotModel& model, const Pose& base_pose,
                           const Twist& base_twist, const BaseAcceleration& base_acc,
                           const Vector24& q, const Vector24& dq, const Vector24& q_des,
                           const Vector24& dq_des, const Vector24& ddq_des,
                           const ControllerGains& gains) {
  // M(q) ddq_cmd + C(q,dq) dq is exactly the g=0 Newton-Euler pass with the
  // commanded acceleration substituted.
  JointState js;
  js.q = q;
  js.dq = dq;
  const Vector24 e = q_des - q;
  const Vector24 de = dq_des - dq;
  js.ddq = ddq_des + gains.kp.cwiseProduct(e) + gains.kd.cwiseProduct(de);
  return inverse_dynamics(model, base_pose, base_twist, base_acc, js).joint_torques;
}

std::vector<WrenchSample> moving_average(const std::vector<WrenchSample>& in, double window,
                                         double rate) {
  if (in.empty() || window <= 0.0) return in;
  const int half = static_cast<int>(std::round(window * rate / 2.0));
  if (half < 1) return in;
  const int n = static_cast<int>(in.size());
  std::vector<WrenchSample> out(in.size());
  for (int i = 0; i < n; ++i) {
    const int h = std::min({half, i, n - 1 - i});  // shrink at boundaries
    WrenchSample acc;
    acc.time = in[i].time;
    for (int k = i - h; k <= i + h; ++k) {
      acc.force += in[k].force;
      acc.torque_about_com += in[k].torque_about_com;
      acc.torque_about_base += in[k].torque_about_base;
    }
    const double inv = 1.0 / (2 * h + 1);
    acc.force *= inv;
    acc.torque_about_com *= inv;
    acc.torque_about_base *= inv;
    out[i] = acc;
  }
  return out;
}

std::vector<WrenchSample> whole_body_motion_wrench(const RobotModel& model,
                                                   const ExecutionTrace& trace,
                                                   double filter_window) {
  const int n = static_cast<int>(trace.samples.size());
  std::vector<WrenchSample> out(std::max(n, 0));
  if (n < 2) return out;
  const double dt = 1.0 / trace.rate;

  std::vector<MomentumState> mom(n);
  for (int i = 0; i < n; ++i) {
    const auto& s = trace.samples[i];
    JointState js;
    js.q = s.q;
    js.dq = s.dq;
    mom[i] = momentum_state(model, s.base_pose, s.base_twist, js);
  }
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - 1);
    const int hi = std::min(n - 1, i + 1);
    const double span = (hi - lo) * dt;
    out[i].time = trace.samples[i].time;
    out[i].force = (mom[hi].linear - mom[lo].linear) / span;
    out[i].torque_about_com = (mom[hi].angular_about_com - mom[lo].angular_about_com) / span;
    out[i].torque_about_base =
        out[i].torque_about_com +
        (mom[i].com - trace.samples[i].base_pose.translation).cross(out[i].force);
  }
  return moving_average(out, filter_window, trace.rate);
}

std::vector<WrenchSample> swing_induced_wrench(const RobotModel& model,
                                               const ExecutionTrace& trace,
                                               double filter_window) {
  const int n = static_cast<int>(trace.samples.size());
  std::vector<WrenchSample> out(std::max(n, 0));
  for (int i = 0; i < n; ++i) {
    const auto& s = trace.samples[i];
    out[i].time = s.time;
    for (int limb = 0; limb < 4; ++limb) {
      if (s.attached[limb]) continue;
      const auto frames = limb_frame_states(
          model, limb, s.base_pose, s.base_twist, s.base_linear_acceleration,
          s.base_angular_acceleration, s.q.segment<6>(6 * limb), s.dq.segment<6>(6 * limb),
          s.ddq.segment<6>(6 * limb));
      const auto inertias = limb_body_inertias(model.limbs[limb]);
      for (int b = 0; b < 6; ++b) {
        if (inertias[b].mass <= 0.0) continue;
        const BodyState bs = body_state(inertias[b], frames[b]);
        // Reaction transferred onto the base.
        out[i].force -= bs.inertial_force;
        out[i].torque_about_base -=
            (bs.com - s.base_pose.translation).cross(bs.inertial_force) +
            bs.inertial_torque_com;
      }
    }
    out[i].torque_about_com = out[i].torque_about_base;
  }
  return moving_average(out, filter_window, trace.rate);
}

void MetricsAccumulator::fold(ChannelAcc& acc, const std::vector<WrenchSample>& series) {
  for (const auto& s : series) {
    const double f = s.force.norm();
    const double t = s.torque_about_base.norm();
    acc.peak_f = std::max(acc.peak_f, f);
    acc.peak_t = std::max(acc.peak_t, t);
    acc.sum_f2 += f * f;
    acc.sum_t2 += t * t;
    ++acc.n;
  }
}

void MetricsAccumulator::add_trace(const RobotModel& model, const ExecutionTrace& trace,
                                   double filter_window) {
  if (trace.samples.empty()) return;
  fold(whole_body_, whole_body_motion_wrench(model, trace, filter_window));
  fold(swing_, swing_induced_wrench(model, trace, filter_window));

  const double dt = 1.0 / trace.rate;
  double prev_power = -1.0;
  for (const auto& s : trace.samples) {
    double power = 0.0;
    for (int j = 0; j < 24; ++j) {
      power += std::abs(s.tau(j) * s.dq(j));
      sum_tau2_ += s.tau(j) * s.tau(j);
      sum_dq2_ += s.dq(j) * s.dq(j);
    }
    ++joint_samples_;
    if (prev_power >= 0.0) work_ += 0.5 * (prev_power + power) * dt;  // trapezoid
    prev_power = power;
  }
  time_ += (trace.samples.size() - 1) * dt;
}

void MetricsAccumulator::add_score_interval(const ScoreInterval& interval) {
  score_weighted_ += interval.score * interval.duration;
  score_time_ += interval.duration;
}

TrialMetrics MetricsAccumulator::finalize(TrialOutcome outcome) const {
  TrialMetrics m;
  m.outcome = outcome;
  m.traversal_time = time_;
  m.mechanical_work = work_;
  if (joint_samples_ > 0) {
    m.rms_joint_torque = std::sqrt(sum_tau2_ / (24.0 * joint_samples_));
    m.rms_joint_velocity = std::sqrt(sum_dq2_ / (24.0 * joint_samples_));
  }
  auto stats = [](const ChannelAcc& a) {
    WrenchStats s;
    s.force_peak = a.peak_f;
    s.torque_peak = a.peak_t;
    if (a.n > 0) {
      s.force_rms = std::sqrt(a.sum_f2 / a.n);
      s.torque_rms = std::sqrt(a.sum_t2 / a.n);
    }
    return s;
  };
  m.whole_body_wrench = stats(whole_body_);
  m.swing_wrench = stats(swing_);
  if (score_time_ > 0.0) m.normalized_contact_score = score_weighted_ / score_time_;
  return m;
}

TrialMetrics compute_metrics(const RobotModel& model, const ExecutionTrace& trace,
                             const std::vector<ScoreInterval>& score_records,
                             TrialOutcome outcome) {
  MetricsAccumulator acc;
  acc.add_trace(model, trace);
  for (const auto& s : score_records) acc.add_score_interval(s);
  return acc.finalize(outcome);
}

}  // namespace microgait
