#include "microgait/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace microgait {

const char* morphology_name(Morphology m) {
  return m == Morphology::YPP ? "YPP" : "RPP";
}

Morphology morphology_from_name(const std::string& name) {
  if (name == "YPP") return Morphology::YPP;
  if (name == "RPP") return Morphology::RPP;
  throw std::invalid_argument("unknown morphology: " + name);
}

Eigen::Matrix<double, 6, 2> LimbSpec::default_angle_limits() {
  Eigen::Matrix<double, 6, 2> lim;
  lim.col(0).setConstant(-2.0 * M_PI);
  lim.col(1).setConstant(2.0 * M_PI);
  return lim;
}

namespace {

struct ChainElement {
  Eigen::Vector3d pre_translation;
  Eigen::Vector3d axis;
};

std::array<ChainElement, 6> limb_chain(const LimbSpec& spec) {
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d hip1 = spec.morphology == Morphology::YPP ? z : x;
  return {ChainElement{Eigen::Vector3d::Zero(), hip1},
          ChainElement{Eigen::Vector3d::Zero(), y},
          ChainElement{spec.link_lengths.x() * x, y},
          ChainElement{spec.link_lengths.y() * x, z},
          ChainElement{Eigen::Vector3d::Zero(), y},
          ChainElement{Eigen::Vector3d::Zero(), x}};
}

Eigen::Matrix3d box_inertia(double mass, const Eigen::Vector3d& dims) {
  const double c = mass / 12.0;
  Eigen::Matrix3d I = Eigen::Matrix3d::Zero();
  I(0, 0) = c * (dims.y() * dims.y() + dims.z() * dims.z());
  I(1, 1) = c * (dims.x() * dims.x() + dims.z() * dims.z());
  I(2, 2) = c * (dims.x() * dims.x() + dims.y() * dims.y());
  return I;
}

}  // namespace

RobotModel RobotModel::default_model(Morphology m) {
  RobotModel model;
  for (auto& limb : model.limbs) limb.morphology = m;
  const double hx = model.base_dimensions.x() / 2.0;
  const double hy = model.base_dimensions.y() / 2.0;
  const Eigen::Matrix3d left = Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d right = Eigen::AngleAxisd(-M_PI / 2.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  model.mount_poses[0] = Pose{left, {hx, hy, 0.0}};    // LF
  model.mount_poses[1] = Pose{right, {hx, -hy, 0.0}};  // RF
  model.mount_poses[2] = Pose{left, {-hx, hy, 0.0}};   // LH
  model.mount_poses[3] = Pose{right, {-hx, -hy, 0.0}}; // RH
  model.base_inertia = box_inertia(model.base_mass, model.base_dimensions);
  return model;
}

RobotModel RobotModel::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open robot model file: " + json_path);
  nlohmann::json j;
  in >> j;

  RobotModel model = default_model(morphology_from_name(j.value("morphology", "YPP")));
  auto read_vec = [&j](const char* key, auto& target) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    for (int i = 0; i < target.size(); ++i) target(i) = arr.at(i).get<double>();
  };
  read_vec("base_dimensions", model.base_dimensions);
  if (j.contains("base_mass")) model.base_mass = j.at("base_mass").get<double>();
  for (auto& limb : model.limbs) {
    read_vec("link_lengths", limb.link_lengths);
    read_vec("joint_masses", limb.joint_masses);
    read_vec("torque_limits", limb.torque_limits);
    read_vec("velocity_limits", limb.velocity_limits);
    if (j.contains("link_density")) limb.link_density = j.at("link_density").get<double>();
    if (j.contains("angle_limits")) {
      const auto& arr = j.at("angle_limits");
      for (int i = 0; i < 6; ++i) {
        limb.angle_limits(i, 0) = arr.at(i).at(0).get<double>();
        limb.angle_limits(i, 1) = arr.at(i).at(1).get<double>();
      }
    }
  }
  model.base_inertia = box_inertia(model.base_mass, model.base_dimensions);
  return model;
}

double RobotModel::total_mass() const {
  double mass = base_mass;
  for (const auto& limb : limbs) mass += limb.mass();
  return mass;
}

LimbFrames limb_frames(const RobotModel& model, int limb, const Vector6& q_limb) {
  const LimbSpec& spec = model.limbs[limb];
  const auto chain = limb_chain(spec);
  LimbFrames out;
  Pose cur = model.mount_poses[limb];
  for (int i = 0; i < 6; ++i) {
    cur.translation += cur.rotation * chain[i].pre_translation;
    out.axes[i] = cur.rotation * chain[i].axis;
    cur.rotation = cur.rotation * Eigen::AngleAxisd(q_limb(i), chain[i].axis).toRotationMatrix();
    out.frames[i] = cur;
  }
  out.ee = cur;
  out.ee.translation += cur.rotation * Eigen::Vector3d(spec.link_lengths.z(), 0.0, 0.0);
  return out;
}

Pose forward_kinematics(const RobotModel& model, int limb, const Vector6& q_limb) {
  return limb_frames(model, limb, q_limb).ee;
}

Matrix6 jacobian(const RobotModel& model, int limb, const Vector6& q_limb) {
  const LimbFrames f = limb_frames(model, limb, q_limb);
  Matrix6 J;
  for (int i = 0; i < 6; ++i) {
    const Eigen::Vector3d& w = f.axes[i];
    J.block<3, 1>(0, i) = w.cross(f.ee.translation - f.frames[i].translation);
    J.block<3, 1>(3, i) = w;
  }
  return J;
}

double manipulability(const RobotModel& model, int limb, const Vector6& q_limb) {
  const Matrix6 J = jacobian(model, limb, q_limb);
  return std::sqrt(std::max(0.0, (J * J.transpose()).determinant()));
}

IkResult inverse_kinematics(const RobotModel& model, int limb, const Pose& target,
                            const Vector6& seed, const IkOptions& opts) {
  const LimbSpec& spec = model.limbs[limb];
  IkResult out;

  const double dist = (target.translation - model.mount_poses[limb].translation).norm();
  if (dist > spec.reach() + 1e-9) {
    out.status = IkStatus::Unreachable;
    return out;
  }

  auto clamp_limits = [&spec](Vector6& q) {
    for (int i = 0; i < 6; ++i) {
      q(i) = std::clamp(q(i), spec.angle_limits(i, 0), spec.angle_limits(i, 1));
    }
  };

  auto error_of = [&](const Vector6& qq, Vector6& e) {
    const Pose fk = forward_kinematics(model, limb, qq);
    e.head<3>() = target.translation - fk.translation;
    e.tail<3>() = rotation_log(target.rotation * fk.rotation.transpose());
    return std::pair<double, double>{e.head<3>().norm(), e.tail<3>().norm()};
  };

  // Damped least-squares descent from one start point.
  auto attempt = [&](Vector6 q) {
    clamp_limits(q);
    double damping = opts.damping;
    Vector6 e;
    auto [pos_err, ori_err] = error_of(q, e);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      if (pos_err < opts.position_tolerance && ori_err < opts.orientation_tolerance) break;
      const Matrix6 J = jacobian(model, limb, q);
      const Matrix6 JJt = J * J.transpose() + damping * damping * Matrix6::Identity();
      const Vector6 step = J.transpose() * JJt.ldlt().solve(e);

      Vector6 q_next = q + step;
      clamp_limits(q_next);
      Vector6 e_next;
      auto [p_next, o_next] = error_of(q_next, e_next);
      if (p_next + o_next <= pos_err + ori_err) {
        q = q_next;
        e = e_next;
        pos_err = p_next;
        ori_err = o_next;
        damping = std::max(damping * 0.5, opts.damping);
      } else {
        damping *= 4.0;
        if (damping > 1e6) break;
      }
    }
    return std::tuple<Vector6, double, double>{q, pos_err, ori_err};
  };

  // Deterministic restarts: DLS is local, so a poor seed (or one near a
  // fold of the workspace) can stall far from the target. The offsets bend
  // the proximal joints into the distinct elbow configurations of both
  // morphologies.
  static const std::array<Vector6, 7> kRestartOffsets = {
      (Vector6() << 0, 0, 0, 0, 0, 0).finished(),
      (Vector6() << 0, -0.6, 1.2, 0, -0.6, 0).finished(),
      (Vector6() << 0, 0.6, -1.2, 0, 0.6, 0).finished(),
      (Vector6() << 0.7, -0.5, 1.0, 0, 0, 0).finished(),
      (Vector6() << -0.7, 0.5, -1.0, 0, 0, 0).finished(),
      (Vector6() << 0.3, -1.1, 1.9, 0, -0.8, 0).finished(),
      (Vector6() << -0.3, 1.1, -1.9, 0, 0.8, 0).finished()};

  // Revolute joints can wind toward the +-2pi limits across many warm
  // starts; rewrapping the seed into (-pi, pi] restores headroom.
  Vector6 wrapped = seed;
  for (int i = 0; i < 6; ++i) {
    wrapped(i) = std::remainder(wrapped(i), 2.0 * M_PI);
  }

  auto [q, pos_err, ori_err] = attempt(seed);
  for (size_t k = 0; k < 2 * kRestartOffsets.size(); ++k) {
    if (pos_err < opts.position_tolerance && ori_err < opts.orientation_tolerance) break;
    const Vector6 start = (k < kRestartOffsets.size())
                              ? Vector6(wrapped + kRestartOffsets[k])
                              : Vector6(seed + kRestartOffsets[k - kRestartOffsets.size()]);
    auto [q_alt, p_alt, o_alt] = attempt(start);
    if (p_alt + o_alt < pos_err + ori_err) {
      q = q_alt;
      pos_err = p_alt;
      ori_err = o_alt;
    }
  }

  out.q = q;
  out.position_error = pos_err;
  out.orientation_error = ori_err;
  out.manipulability = manipulability(model, limb, q);

  const bool converged =
      pos_err < opts.position_tolerance && ori_err < opts.orientation_tolerance;
  if (converged) {
    out.status = out.manipulability < opts.manipulability_threshold ? IkStatus::NearSingular
                                                                    : IkStatus::Ok;
    return out;
  }
  if (dist > 0.999 * spec.reach()) {
    out.status = IkStatus::Unreachable;
  } else if (out.manipulability < opts.manipulability_threshold) {
    out.status = IkStatus::NearSingular;
  } else {
    bool pinned = false;
    for (int i = 0; i < 6; ++i) {
      if (q(i) <= spec.angle_limits(i, 0) + 1e-12 || q(i) >= spec.angle_limits(i, 1) - 1e-12) {
        pinned = true;
      }
    }
    out.status = pinned ? IkStatus::JointLimit : IkStatus::Unreachable;
  }
  return out;
}

std::array<BodyInertia, 6> limb_body_inertias(const LimbSpec& spec) {
  std::array<BodyInertia, 6> bodies{};
  // Joint point masses sit at their frame origins; links are uniform thin
  // rods along local +x to the next joint origin. Rods attach to the frame
  // that moves them: L1 after joint 2, L2 after joint 3, L3 after joint 6.
  const std::array<double, 6> rod_lengths = {0.0, spec.link_lengths.x(), spec.link_lengths.y(),
                                             0.0, 0.0, spec.link_lengths.z()};
  for (int i = 0; i < 6; ++i) {
    const double m_pt = spec.joint_masses(i);
    const double len = rod_lengths[i];
    const double m_rod = spec.link_density * len;
    BodyInertia b;
    b.mass = m_pt + m_rod;
    if (b.mass <= 0.0) continue;
    const Eigen::Vector3d rod_com(len / 2.0, 0.0, 0.0);
    b.com_local = (m_rod * rod_com) / b.mass;
    Eigen::Matrix3d I = Eigen::Matrix3d::Zero();
    if (m_rod > 0.0) {
      const double i_perp = m_rod * len * len / 12.0;
      I(1, 1) = i_perp;
      I(2, 2) = i_perp;
      // Parallel axis: rod COM offset from composite COM.
      const Eigen::Vector3d d_rod = rod_com - b.com_local;
      I += m_rod * (d_rod.squaredNorm() * Eigen::Matrix3d::Identity() - d_rod * d_rod.transpose());
    }
    const Eigen::Vector3d d_pt = -b.com_local;
    I += m_pt * (d_pt.squaredNorm() * Eigen::Matrix3d::Identity() - d_pt * d_pt.transpose());
    b.inertia_com = I;
    bodies[i] = b;
  }
  return bodies;
}

namespace {

struct FrameMotion {
  Pose pose;
  Eigen::Vector3d omega;
  Eigen::Vector3d v;  // frame origin velocity
};

// Velocity-level propagation of one limb given base motion, in world frame.
std::array<FrameMotion, 6> limb_motion(const RobotModel& model, int limb, const Pose& base_pose,
                                       const Twist& base_twist, const Vector6& q,
                                       const Vector6& dq) {
  const auto chain = limb_chain(model.limbs[limb]);
  std::array<FrameMotion, 6> out;
  Pose cur = base_pose * model.mount_poses[limb];
  Eigen::Vector3d omega = base_twist.angular;
  Eigen::Vector3d v = base_twist.linear +
                      omega.cross(cur.translation - base_pose.translation);
  for (int i = 0; i < 6; ++i) {
    const Eigen::Vector3d r = cur.rotation * chain[i].pre_translation;
    cur.translation += r;
    v += omega.cross(r);
    const Eigen::Vector3d axis_w = cur.rotation * chain[i].axis;
    cur.rotation = cur.rotation * Eigen::AngleAxisd(q(i), chain[i].axis).toRotationMatrix();
    omega += axis_w * dq(i);
    out[i] = FrameMotion{cur, omega, v};
  }
  return out;
}

}  // namespace

std::array<FrameState, 6> limb_frame_states(const RobotModel& model, int limb,
                                            const Pose& base_pose, const Twist& base_twist,
                                            const Eigen::Vector3d& base_linear_acc,
                                            const Eigen::Vector3d& base_angular_acc,
                                            const Vector6& q, const Vector6& dq,
                                            const Vector6& ddq) {
  const auto chain = limb_chain(model.limbs[limb]);
  std::array<FrameState, 6> out;

  Pose cur = base_pose * model.mount_poses[limb];
  Eigen::Vector3d omega = base_twist.angular;
  Eigen::Vector3d alpha = base_angular_acc;
  const Eigen::Vector3d r0 = cur.translation - base_pose.translation;
  Eigen::Vector3d v = base_twist.linear + omega.cross(r0);
  Eigen::Vector3d a = base_linear_acc + alpha.cross(r0) + omega.cross(omega.cross(r0));

  for (int i = 0; i < 6; ++i) {
    const Eigen::Vector3d r = cur.rotation * chain[i].pre_translation;
    cur.translation += r;
    v += omega.cross(r);
    a += alpha.cross(r) + omega.cross(omega.cross(r));
    const Eigen::Vector3d axis_w = cur.rotation * chain[i].axis;
    cur.rotation = cur.rotation * Eigen::AngleAxisd(q(i), chain[i].axis).toRotationMatrix();
    alpha += axis_w * ddq(i) + omega.cross(axis_w * dq(i));
    omega += axis_w * dq(i);
    out[i] = FrameState{cur, omega, v, alpha, a};
  }
  return out;
}

ComState com_state(const RobotModel& model, const Pose& base_pose, const Twist& base_twist,
                   const JointState& joints) {
  ComState out;
  Eigen::Vector3d weighted_pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d weighted_vel = Eigen::Vector3d::Zero();

  weighted_pos += model.base_mass * base_pose.translation;
  weighted_vel += model.base_mass * base_twist.linear;
  out.total_mass += model.base_mass;

  for (int limb = 0; limb < 4; ++limb) {
    const auto motion = limb_motion(model, limb, base_pose, base_twist,
                                    joints.q.segment<6>(6 * limb), joints.dq.segment<6>(6 * limb));
    const auto bodies = limb_body_inertias(model.limbs[limb]);
    for (int i = 0; i < 6; ++i) {
      if (bodies[i].mass <= 0.0) continue;
      const Eigen::Vector3d c_off = motion[i].pose.rotation * bodies[i].com_local;
      const Eigen::Vector3d c = motion[i].pose.translation + c_off;
      const Eigen::Vector3d vc = motion[i].v + motion[i].omega.cross(c_off);
      weighted_pos += bodies[i].mass * c;
      weighted_vel += bodies[i].mass * vc;
      out.total_mass += bodies[i].mass;
    }
  }
  out.com = weighted_pos / out.total_mass;
  out.com_velocity = weighted_vel / out.total_mass;
  return out;
}

MomentumState momentum_state(const RobotModel& model, const Pose& base_pose,
                             const Twist& base_twist, const JointState& joints) {
  const ComState cs = com_state(model, base_pose, base_twist, joints);
  MomentumState out;
  out.com = cs.com;
  out.linear = cs.total_mass * cs.com_velocity;

  auto add_body = [&](const Eigen::Vector3d& c, const Eigen::Vector3d& vc, double mass,
                      const Eigen::Matrix3d& inertia_w, const Eigen::Vector3d& omega) {
    out.angular_about_com += (c - cs.com).cross(mass * vc) + inertia_w * omega;
  };

  const Eigen::Matrix3d base_I_w =
      base_pose.rotation * model.base_inertia * base_pose.rotation.transpose();
  add_body(base_pose.translation, base_twist.linear, model.base_mass, base_I_w,
           base_twist.angular);

  for (int limb = 0; limb < 4; ++limb) {
    const auto motion = limb_motion(model, limb, base_pose, base_twist,
                                    joints.q.segment<6>(6 * limb), joints.dq.segment<6>(6 * limb));
    const auto bodies = limb_body_inertias(model.limbs[limb]);
    for (int i = 0; i < 6; ++i) {
      if (bodies[i].mass <= 0.0) continue;
      const Eigen::Matrix3d R = motion[i].pose.rotation;
      const Eigen::Vector3d c_off = R * bodies[i].com_local;
      const Eigen::Vector3d c = motion[i].pose.translation + c_off;
      const Eigen::Vector3d vc = motion[i].v + motion[i].omega.cross(c_off);
      add_body(c, vc, bodies[i].mass, R * bodies[i].inertia_com * R.transpose(), motion[i].omega);
    }
  }
  return out;
}

}  // namespace microgait
