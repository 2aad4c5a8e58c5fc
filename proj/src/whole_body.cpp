#include "microgait/whole_body.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "json.hpp"

#include "microgait/dynamics_eval.hpp"

namespace microgait {

ContactSet contact_set_at(const TraceSample& sample, const ContactModel& model) {
  ContactSet set;
  set.model = model;
  const Pose base_inv = sample.base_pose.inverse();
  for (int limb = 0; limb < 4; ++limb) {
    if (!sample.attached[limb]) continue;
    ContactPoint cp;
    cp.limb_index = limb;
    cp.contact_frame = base_inv * sample.contact_pose[limb];
    cp.position = cp.contact_frame.translation;
    set.contacts.push_back(cp);
  }
  return set;
}

StabilityStatus monitor_stability(const RobotModel& model, const RobotState& state,
                                  const Wrench& estimated_wrench, const ContactSet& contacts,
                                  const MonitorThresholds& thresholds) {
  for (int limb = 0; limb < 4; ++limb) {
    if (state.attachment[limb] < 0) continue;
    const Pose ee_world = state.base_pose * forward_kinematics(model, limb, state.joints.limb_q(limb));
    if ((ee_world.translation - state.contact_pose[limb].translation).norm() >
        thresholds.proximity) {
      return StabilityStatus::GraspRisk;
    }
  }
  const MembershipResult mem = wrench_membership(contacts, estimated_wrench);
  if (!mem.empty_set && mem.margin < thresholds.margin) {
    return StabilityStatus::WrenchInfeasible;
  }
  return StabilityStatus::Ok;
}

namespace {

// Largest plausible between-sample joint change during tracking; anything
// beyond this is an IK branch flip, not motion.
constexpr double kMaxJointStep = 0.5;  // rad

// World end-effector target for one limb at stride time t.
Pose limb_target_world(const StrideTrajectory& traj, int limb, double t) {
  return traj.sample_limb(limb, t).pose;
}

}  // namespace

CoordinationResult coordinate_stride(const RobotModel& model, const StrideGoal& goal,
                                     const StrideTrajectory& trajectory,
                                     const RobotState& start_state, double rate,
                                     const IkOptions& ik_opts) {
  (void)goal;
  CoordinationResult out;
  out.dt = 1.0 / rate;

  // Key stages: swing-phase boundaries for every limb, solved before any
  // dense tracking so failures surface early with stage identity.
  std::array<Vector6, 4> key_seed;
  for (int limb = 0; limb < 4; ++limb) key_seed[limb] = start_state.joints.limb_q(limb);

  for (int limb = 0; limb < 4; ++limb) {
    const auto& swing = trajectory.swings[limb];
    const double ts = trajectory.schedule.start_time[limb];
    const std::array<double, 4> key_times = {
        ts, ts + (swing.duration() - swing.motion_duration()) / 2.0,
        ts + swing.duration() / 2.0, trajectory.schedule.end_time[limb]};
    for (double t : key_times) {
      const Pose base = trajectory.sample_base(t).pose;
      const Pose target = base.inverse() * limb_target_world(trajectory, limb, t);
      const IkResult ik = inverse_kinematics(model, limb, target, key_seed[limb], ik_opts);
      if (!ik.ok()) {
        out.failure.info.limb = limb;
        out.failure.info.stage = ik.status == IkStatus::NearSingular
                                     ? FailureStage::NearSingularity
                                     : FailureStage::KeyStageIk;
        out.failure.detail = "key-stage IK failure at t=" + std::to_string(t);
        return out;
      }
      key_seed[limb] = ik.q;
    }
  }

  // Dense tracking at the playback rate with warm-started seeds.
  const int n = static_cast<int>(std::floor(trajectory.duration() * rate)) + 1;
  out.q_samples.reserve(n);
  std::array<Vector6, 4> seed;
  for (int limb = 0; limb < 4; ++limb) seed[limb] = start_state.joints.limb_q(limb);

  for (int k = 0; k < n; ++k) {
    const double t = std::min(k * out.dt, trajectory.duration());
    const Pose base_inv = trajectory.sample_base(t).pose.inverse();
    Vector24 q;
    for (int limb = 0; limb < 4; ++limb) {
      const Pose target = base_inv * limb_target_world(trajectory, limb, t);
      const IkResult ik = inverse_kinematics(model, limb, target, seed[limb], ik_opts);
      if (!ik.ok()) {
        out.failure.info.limb = limb;
        out.failure.info.stage = FailureStage::DenseIk;
        out.failure.detail = "dense IK failure at t=" + std::to_string(t);
        return out;
      }
      // Continuity guard: a converged solution on a different IK branch
      // reads as a near-instant joint jump, which finite differencing later
      // inflates into phantom accelerations. Surface it as a coordination
      // failure so the plan modifier picks a different anchor or order.
      if (k > 0 && (ik.q - seed[limb]).cwiseAbs().maxCoeff() > kMaxJointStep) {
        out.failure.info.limb = limb;
        out.failure.info.stage = FailureStage::DenseIk;
        out.failure.detail = "IK branch discontinuity at t=" + std::to_string(t);
        return out;
      }
      seed[limb] = ik.q;
      q.segment<6>(6 * limb) = ik.q;
    }
    out.q_samples.push_back(q);
  }
  out.ok = true;
  return out;
}

ExecutionTrace execute_stride(const RobotModel& model, const CoordinationResult& coordination,
                              const StrideTrajectory& trajectory, const RobotState& start_state,
                              const ExecutionConfig& config) {
  ExecutionTrace trace;
  trace.rate = config.rate;
  const int n = static_cast<int>(coordination.q_samples.size());
  if (n == 0) return trace;
  const double dt = coordination.dt;

  trace.samples.resize(n);
  for (int k = 0; k < n; ++k) {
    TraceSample& s = trace.samples[k];
    s.time = start_state.time + k * dt;
    const double t = std::min(k * dt, trajectory.duration());
    const PoseSample base = trajectory.sample_base(t);
    s.base_pose = base.pose;
    s.base_twist = base.twist;
    s.base_linear_acceleration = base.linear_acceleration;
    s.base_angular_acceleration = base.angular_acceleration;
    s.q = coordination.q_samples[k];
    for (int limb = 0; limb < 4; ++limb) {
      const auto ls = trajectory.sample_limb(limb, t);
      s.stage[limb] = ls.stage;
      s.attached[limb] = !ls.in_swing;
      s.contact_pose[limb] =
          t < trajectory.schedule.start_time[limb] ? trajectory.current_contacts[limb]
                                                   : trajectory.target_contacts[limb];
    }
  }

  // Joint rates by central differences over the playback samples.
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - 1);
    const int hi = std::min(n - 1, k + 1);
    const double span = (hi - lo) * dt;
    if (span > 0.0) {
      trace.samples[k].dq = (trace.samples[hi].q - trace.samples[lo].q) / span;
    }
  }
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - 1);
    const int hi = std::min(n - 1, k + 1);
    const double span = (hi - lo) * dt;
    if (span > 0.0) {
      trace.samples[k].ddq = (trace.samples[hi].dq - trace.samples[lo].dq) / span;
    }
  }

  // Gripper events.
  for (int limb = 0; limb < 4; ++limb) {
    trace.events.push_back(TraceEvent{
        start_state.time + trajectory.schedule.start_time[limb], "release", limb, ""});
    trace.events.push_back(
        TraceEvent{start_state.time + trajectory.schedule.end_time[limb], "grasp", limb, ""});
  }
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });

  // Torques, limits, monitor.
  double next_monitor = 0.0;
  int truncate_at = n;
  // Trailing 0.1 s mean of the base reaction (base coordinates): the
  // monitored estimate is the smoothed motion-induced wrench, which rides
  // through single-sample spikes at swing-path corners.
  constexpr double kMonitorWindow = 0.1;
  const int window_samples = std::max(1, static_cast<int>(std::lround(kMonitorWindow / dt)));
  std::vector<Eigen::Vector3d> recent_f;
  std::vector<Eigen::Vector3d> recent_t;
  for (int k = 0; k < n; ++k) {
    TraceSample& s = trace.samples[k];
    JointState js;
    js.q = s.q;
    js.dq = s.dq;
    js.ddq = s.ddq;
    const BaseAcceleration acc{s.base_linear_acceleration, s.base_angular_acceleration};
    const InverseDynamicsResult id =
        inverse_dynamics(model, s.base_pose, s.base_twist, acc, js);
    s.tau = id.joint_torques;

    for (int limb = 0; limb < 4; ++limb) {
      for (int j = 0; j < 6; ++j) {
        const int idx = 6 * limb + j;
        const bool vel = std::abs(s.dq(idx)) > model.limbs[limb].velocity_limits(j);
        const bool trq = std::abs(s.tau(idx)) > model.limbs[limb].torque_limits(j);
        if (vel || trq) {
          trace.events.push_back(TraceEvent{s.time, "limit_violation", limb,
                                            vel ? "velocity joint " + std::to_string(j)
                                                : "torque joint " + std::to_string(j)});
          if (config.hard_fail_on_limit_violation) {
            trace.paused = true;
            trace.pause_cause = "limit_violation";
            truncate_at = k + 1;
          }
        }
      }
    }
    if (trace.paused) break;

    recent_f.push_back(s.base_pose.rotation.transpose() * id.base_reaction.force);
    recent_t.push_back(s.base_pose.rotation.transpose() * id.base_reaction.torque);
    if (static_cast<int>(recent_f.size()) > window_samples) {
      recent_f.erase(recent_f.begin());
      recent_t.erase(recent_t.begin());
    }

    if (config.monitor_enabled && k * dt >= next_monitor) {
      next_monitor += config.monitor.period;
      RobotState st;
      st.base_pose = s.base_pose;
      st.base_twist = s.base_twist;
      st.joints = js;
      for (int limb = 0; limb < 4; ++limb) {
        st.attachment[limb] = s.attached[limb] ? limb : -1;
        st.contact_pose[limb] = s.contact_pose[limb];
      }
      const ContactSet contacts = contact_set_at(s, config.contact_model);
      // Smoothed motion-induced wrench in base coordinates, about the base
      // origin.
      Wrench w;
      w.force.setZero();
      w.torque.setZero();
      for (size_t i = 0; i < recent_f.size(); ++i) {
        w.force += recent_f[i];
        w.torque += recent_t[i];
      }
      w.force /= static_cast<double>(recent_f.size());
      w.torque /= static_cast<double>(recent_t.size());
      const StabilityStatus status =
          monitor_stability(model, st, w, contacts, config.monitor);
      if (status != StabilityStatus::Ok) {
        trace.paused = true;
        trace.pause_cause =
            status == StabilityStatus::GraspRisk ? "grasp_risk" : "wrench_infeasible";
        trace.events.push_back(TraceEvent{s.time, "monitor_pause", -1, trace.pause_cause});
        truncate_at = k + 1;
        break;
      }
    }
  }
  if (truncate_at < n) trace.samples.resize(truncate_at);
  return trace;
}

RobotState state_after(const RobotModel& model, const ExecutionTrace& trace,
                       const RobotState& start_state, const StrideTrajectory& trajectory) {
  (void)model;
  RobotState out = start_state;
  if (trace.samples.empty()) return out;
  const TraceSample& last = trace.samples.back();
  out.base_pose = last.base_pose;
  out.base_twist = last.base_twist;
  out.joints.q = last.q;
  out.joints.dq = last.dq;
  out.joints.ddq = last.ddq;
  out.time = last.time;
  for (int limb = 0; limb < 4; ++limb) {
    out.attachment[limb] = last.attached[limb] ? limb : -1;
    out.contact_pose[limb] = last.contact_pose[limb];
  }
  if (!trace.paused) {
    for (int limb = 0; limb < 4; ++limb) {
      out.attachment[limb] = limb;
      out.contact_pose[limb] = trajectory.target_contacts[limb];
    }
  }
  return out;
}

void save_trace_csv(const ExecutionTrace& trace, const std::string& path) {
  std::ofstream f(path);
  f << "time,base_x,base_y,base_z";
  for (int j = 0; j < 24; ++j) f << ",q" << j;
  for (int j = 0; j < 24; ++j) f << ",tau" << j;
  f << ",attached0,attached1,attached2,attached3\n";
  for (const auto& s : trace.samples) {
    f << s.time << "," << s.base_pose.translation.x() << "," << s.base_pose.translation.y()
      << "," << s.base_pose.translation.z();
    for (int j = 0; j < 24; ++j) f << "," << s.q(j);
    for (int j = 0; j < 24; ++j) f << "," << s.tau(j);
    for (int l = 0; l < 4; ++l) f << "," << (s.attached[l] ? 1 : 0);
    f << "\n";
  }
}

void save_trace_binary(const ExecutionTrace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  const std::uint64_t n = trace.samples.size();
  f.write(reinterpret_cast<const char*>(&trace.rate), sizeof(double));
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& s : trace.samples) {
    auto put = [&f](const double* p, size_t count) {
      f.write(reinterpret_cast<const char*>(p), count * sizeof(double));
    };
    put(&s.time, 1);
    put(s.base_pose.translation.data(), 3);
    put(s.q.data(), 24);
    put(s.dq.data(), 24);
    put(s.tau.data(), 24);
  }
}

std::string trace_events_json(const ExecutionTrace& trace) {
  nlohmann::json j;
  j["rate"] = trace.rate;
  j["paused"] = trace.paused;
  j["pause_cause"] = trace.pause_cause;
  j["events"] = nlohmann::json::array();
  for (const auto& e : trace.events) {
    j["events"].push_back(
        {{"time", e.time}, {"type", e.type}, {"limb", e.limb}, {"detail", e.detail}});
  }
  return j.dump(2);
}

}  // namespace microgait
