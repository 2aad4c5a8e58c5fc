#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "microgait/dynamics_eval.hpp"

using namespace microgait;

namespace {

Vector24 random_joints(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector24 q;
  for (int i = 0; i < 24; ++i) q(i) = u(rng);
  return q;
}

}  // namespace

TEST_CASE("inverse_dynamics: static state gives zero torques and zero base reaction") {
  for (Morphology m : {Morphology::YPP, Morphology::RPP}) {
    const RobotModel model = RobotModel::default_model(m);
    JointState js;
    std::mt19937_64 rng(1);
    js.q = random_joints(rng);
    const InverseDynamicsResult r =
        inverse_dynamics(model, Pose{}, Twist{}, BaseAcceleration{}, js);
    CHECK(r.joint_torques.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(r.base_reaction.force.norm() == doctest::Approx(0.0));
    CHECK(r.base_reaction.torque.norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("inverse_dynamics: pure base acceleration gives F = m_total a (Newton oracle)") {
  const RobotModel model = RobotModel::default_model(Morphology::YPP);
  JointState js;  // q = dq = ddq = 0
  BaseAcceleration acc;
  acc.linear = Eigen::Vector3d(0.5, -0.2, 0.1);
  const InverseDynamicsResult r = inverse_dynamics(model, Pose{}, Twist{}, acc, js);
  CHECK((r.base_reaction.force - model.total_mass() * acc.linear).norm() < 1e-9);
}

TEST_CASE("inverse_dynamics: torques match the finite-difference mass-matrix oracle") {
  // tau = M(q) qdd + C(q, qd) qd with the base fixed. M is assembled column
  // by column from inverse_dynamics itself evaluated at unit accelerations
  // with qd = 0 (standard RNEA identity), then validated against an
  // energy-consistency check: M must be symmetric positive definite and
  // match d/dh of momentum under small velocity steps.
  const RobotModel model = RobotModel::default_model(Morphology::RPP);
  std::mt19937_64 rng(3);
  JointState js;
  js.q = random_joints(rng);

  // Column extraction: tau(q, 0, e_i) = M(q) e_i.
  Eigen::MatrixXd M(24, 24);
  for (int i = 0; i < 24; ++i) {
    JointState probe;
    probe.q = js.q;
    probe.ddq = Vector24::Zero();
    probe.ddq(i) = 1.0;
    M.col(i) =
        inverse_dynamics(model, Pose{}, Twist{}, BaseAcceleration{}, probe).joint_torques;
  }
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  // Limbs are independent chains: M must be block diagonal.
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != b) CHECK(M.block<6, 6>(6 * a, 6 * b).cwiseAbs().maxCoeff() < 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  // Positive semi-definite: the wrist joint can align with its own rod axis,
  // which leaves a zero-inertia mode.
  CHECK(es.eigenvalues().minCoeff() > -1e-9);

  // Independent energy oracle: kinetic energy from the momentum path must
  // equal 0.5 qd' M qd for pure joint motion.
  JointState moving;
  moving.q = js.q;
  moving.dq = 0.3 * random_joints(rng);
  double ke = 0.0;
  for (int limb = 0; limb < 4; ++limb) {
    const auto states = limb_frame_states(model, limb, Pose{}, Twist{},
                                          Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                          moving.q.segment<6>(6 * limb),
                                          moving.dq.segment<6>(6 * limb), Vector6::Zero());
    const auto inertias = limb_body_inertias(model.limbs[limb]);
    for (int i = 0; i < 6; ++i) {
      const Eigen::Vector3d v_com =
          states[i].v + states[i].omega.cross(states[i].pose.rotation * inertias[i].com_local);
      const Eigen::Matrix3d I_w = states[i].pose.rotation * inertias[i].inertia_com *
                                  states[i].pose.rotation.transpose();
      ke += 0.5 * inertias[i].mass * v_com.squaredNorm() +
            0.5 * states[i].omega.dot(I_w * states[i].omega);
    }
  }
  const double ke_from_M = 0.5 * moving.dq.dot(M * moving.dq);
  CHECK(ke == doctest::Approx(ke_from_M).epsilon(1e-6));

  // Full torque identity tau = M qdd + C qd: the Coriolis part is
  // tau(q, qd, 0); check additivity of the two calls against a combined call.
  JointState full;
  full.q = js.q;
  full.dq = moving.dq;
  full.ddq = 0.5 * random_joints(rng);
  const Vector24 tau_full =
      inverse_dynamics(model, Pose{}, Twist{}, BaseAcceleration{}, full).joint_torques;
  JointState cor = full;
  cor.ddq = Vector24::Zero();
  const Vector24 tau_c =
      inverse_dynamics(model, Pose{}, Twist{}, BaseAcceleration{}, cor).joint_torques;
  const Vector24 oracle = M * full.ddq + tau_c;
  CHECK((tau_full - oracle).cwiseAbs().maxCoeff() <
        1e-4 * std::max(1.0, tau_full.cwiseAbs().maxCoeff()));
}

TEST_CASE("controller_torque: reductions of the torque law") {
  const RobotModel model = RobotModel::default_model(Morphology::YPP);
  std::mt19937_64 rng(4);
  const Vector24 q = random_joints(rng);
  const Vector24 dq = 0.2 * random_joints(rng);
  const Vector24 ddq_des = 0.3 * random_joints(rng);
  ControllerGains gains;

  // e = de = 0 reduces to inverse dynamics.
  JointState js;
  js.q = q;
  js.dq = dq;
  js.ddq = ddq_des;
  const Vector24 id =
      inverse_dynamics(model, Pose{}, Twist{}, BaseAcceleration{}, js).joint_torques;
  const Vector24 ct = controller_torque(model, Pose{}, Twist{}, BaseAcceleration{}, q, dq, q,
                                        dq, ddq_des, gains);
  CHECK((ct - id).cwiseAbs().maxCoeff() < 1e-9);

  // Static with position error: tau = M Kp e.
  const Vector24 e = 0.05 * random_joints(rng);
  const Vector24 tau_e =
      controller_torque(model, Pose{}, Twist{}, BaseAcceleration{}, q, Vector24::Zero(),
                        Vector24(q + e), Vector24::Zero(), Vector24::Zero(), gains);
  // Compare against M * (Kp .* e) assembled by unit-acceleration probes.
  Vector24 kp_e;
  for (int i = 0; i < 24; ++i) kp_e(i) = gains.kp(i) * e(i);
  JointState probe;
  probe.q = q;
  probe.ddq = kp_e;
  const Vector24 oracle =
      inverse_dynamics(model, Pose{}, Twist{}, BaseAcceleration{}, probe).joint_torques;
  CHECK((tau_e - oracle).cwiseAbs().maxCoeff() < 1e-9);

  // Doubling Kp doubles the error-feedback component.
  ControllerGains twice = gains;
  twice.kp *= 2.0;
  const Vector24 tau_2e =
      controller_torque(model, Pose{}, Twist{}, BaseAcceleration{}, q, Vector24::Zero(),
                        Vector24(q + e), Vector24::Zero(), Vector24::Zero(), twice);
  CHECK((tau_2e - 2.0 * tau_e).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("moving_average: constant signals pass through unchanged") {
  std::vector<WrenchSample> in;
  for (int k = 0; k < 100; ++k) {
    WrenchSample s;
    s.time = k * 0.01;
    s.force = Eigen::Vector3d(1, 2, 3);
    s.torque_about_base = Eigen::Vector3d(-1, 0, 2);
    in.push_back(s);
  }
  const auto out = moving_average(in, 0.1, 100.0);
  REQUIRE(out.size() == in.size());
  for (const auto& s : out) {
    CHECK((s.force - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);
    CHECK((s.torque_about_base - Eigen::Vector3d(-1, 0, 2)).norm() < 1e-12);
  }
}

namespace {

// Builds a trace of the whole robot translating rigidly along x with
// position x(t), constant joints.
ExecutionTrace rigid_translation_trace(const RobotModel& model, double rate, double duration,
                                       const std::function<double(double)>& x,
                                       const std::function<double(double)>& v,
                                       const std::function<double(double)>& a) {
  ExecutionTrace trace;
  trace.rate = rate;
  const int n = static_cast<int>(duration * rate) + 1;
  for (int k = 0; k < n; ++k) {
    TraceSample s;
    s.time = k / rate;
    s.base_pose.translation = Eigen::Vector3d(x(s.time), 0, 0.8);
    s.base_twist.linear = Eigen::Vector3d(v(s.time), 0, 0);
    s.base_linear_acceleration = Eigen::Vector3d(a(s.time), 0, 0);
    for (int limb = 0; limb < 4; ++limb) {
      s.contact_pose[limb].translation = Eigen::Vector3d(0, limb < 2 ? 0.9 : -0.9, 0);
    }
    (void)model;
    trace.samples.push_back(s);
  }
  return trace;
}

}  // namespace

TEST_CASE("whole_body_motion_wrench: static and uniform-translation traces give zero") {
  const RobotModel model = RobotModel::default_model(Morphology::YPP);
  const auto static_trace = rigid_translation_trace(
      model, 100.0, 1.0, [](double) { return 0.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
  for (const auto& s : whole_body_motion_wrench(model, static_trace)) {
    CHECK(s.force.norm() < 1e-9);
    CHECK(s.torque_about_com.norm() < 1e-9);
  }

  const double v0 = 0.2;
  const auto uniform = rigid_translation_trace(
      model, 100.0, 1.0, [v0](double t) { return v0 * t; }, [v0](double) { return v0; },
      [](double) { return 0.0; });
  for (const auto& s : whole_body_motion_wrench(model, uniform)) {
    CHECK(s.force.norm() < 1e-6);
  }
}

TEST_CASE("whole_body_motion_wrench: sinusoid amplitude matches the filtered analytic oracle") {
  const RobotModel model = RobotModel::default_model(Morphology::YPP);
  const double A = 0.05, w = 2.0 * M_PI * 1.0;  // 1 Hz
  const double rate = 500.0, T = 4.0, window = 0.1;
  const auto trace = rigid_translation_trace(
      model, rate, T, [&](double t) { return A * std::sin(w * t); },
      [&](double t) { return A * w * std::cos(w * t); },
      [&](double t) { return -A * w * w * std::sin(w * t); });
  const auto series = whole_body_motion_wrench(model, trace, window);

  // Moving average of a sinusoid attenuates by sinc(w * window / 2).
  const double sinc = std::sin(w * window / 2.0) / (w * window / 2.0);
  const double expected = model.total_mass() * A * w * w * sinc;
  double peak = 0.0;
  for (size_t i = series.size() / 4; i < 3 * series.size() / 4; ++i)
    peak = std::max(peak, series[i].force.norm());
  CHECK(peak == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("swing_induced_wrench: all-stance is zero; mirrored swings cancel laterally") {
  const RobotModel model = RobotModel::default_model(Morphology::YPP);
  const auto stance = rigid_translation_trace(
      model, 100.0, 0.5, [](double) { return 0.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
  for (const auto& s : swing_induced_wrench(model, stance)) {
    CHECK(s.force.norm() < 1e-9);
  }

  // Two mirror-image swings: limbs 0 (left) and 1 (right) follow y-mirrored
  // joint paths, so lateral (y) force components cancel.
  ExecutionTrace trace;
  trace.rate = 200.0;
  const int n = 201;
  for (int k = 0; k < n; ++k) {
    TraceSample s;
    s.time = k / trace.rate;
    s.base_pose.translation = Eigen::Vector3d(0, 0, 0.8);
    const double u = std::sin(2.0 * M_PI * s.time);
    // Mirror symmetry: mounts are mirrored, so identical joint angles on the
    // mirrored chains produce y-mirrored motion.
    for (int limb : {0, 1}) {
      Vector6 q, dq, ddq;
      q << 0.0, -0.5 + 0.3 * u, 1.0, 0.0, -0.5, 0.0;
      dq << 0.0, 0.3 * 2.0 * M_PI * std::cos(2.0 * M_PI * s.time), 0, 0, 0, 0;
      ddq << 0.0, -0.3 * std::pow(2.0 * M_PI, 2) * u, 0, 0, 0, 0;
      s.q.segment<6>(6 * limb) = q;
      s.dq.segment<6>(6 * limb) = dq;
      s.ddq.segment<6>(6 * limb) = ddq;
      s.attached[limb] = false;  // in swing
      s.stage[limb] = 3;
    }
    trace.samples.push_back(s);
  }
  const auto series = swing_induced_wrench(model, trace, 0.0);
  for (const auto& s : series) {
    CHECK(std::abs(s.force.y()) < 1e-9);
  }
}

TEST_CASE("metrics: static trace zeroes, work integral, and score weighting") {
  const RobotModel model = RobotModel::default_model(Morphology::YPP);
  const auto stance = rigid_translation_trace(
      model, 100.0, 1.0, [](double) { return 0.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
  const TrialMetrics zero = compute_metrics(model, stance, {});
  CHECK(zero.mechanical_work == doctest::Approx(0.0));
  CHECK(zero.whole_body_wrench.force_rms == doctest::Approx(0.0));
  CHECK(zero.rms_joint_torque == doctest::Approx(0.0));

  // Single joint: tau = 1 N.m at omega = 2 rad/s for 3 s -> W = 6 J.
  ExecutionTrace work_trace;
  work_trace.rate = 100.0;
  for (int k = 0; k <= 300; ++k) {
    TraceSample s;
    s.time = k / 100.0;
    s.base_pose.translation = Eigen::Vector3d(0, 0, 0.8);
    s.tau(0) = 1.0;
    s.dq(0) = 2.0;
    work_trace.samples.push_back(s);
  }
  const TrialMetrics w = compute_metrics(model, work_trace, {});
  CHECK(w.mechanical_work == doctest::Approx(6.0).epsilon(1e-3));

  // Two configurations scored 10 and 20, held 1 s and 3 s -> 17.5.
  MetricsAccumulator acc;
  acc.add_score_interval(ScoreInterval{1.0, 10.0});
  acc.add_score_interval(ScoreInterval{3.0, 20.0});
  const TrialMetrics sm = acc.finalize(TrialOutcome::Success);
  CHECK(sm.normalized_contact_score == doctest::Approx(17.5));
}

TEST_CASE("trial outcome names") {
  CHECK(std::string(trial_outcome_name(TrialOutcome::Success)) == "success");
  CHECK(std::string(trial_outcome_name(TrialOutcome::PlanFailure)) != "");
  CHECK(std::string(trial_outcome_name(TrialOutcome::Instability)) != "");
}
