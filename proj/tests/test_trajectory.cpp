#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "microgait/trajectory.hpp"

using namespace microgait;

namespace {

Pose grasp_at(double x, double y, double z,
              const Eigen::Matrix3d& R = Eigen::Matrix3d::Identity()) {
  Pose p;
  p.rotation = R;
  p.translation = Eigen::Vector3d(x, y, z);
  return p;
}

}  // namespace

TEST_CASE("ScalarProfile: symmetry, cruise speed, and rest-to-rest boundaries") {
  const double L = 1.0, T = 10.0, vmax = 0.5;
  const ScalarProfile p = ScalarProfile::make(L, T, vmax);
  CHECK(p.duration() == doctest::Approx(T));
  CHECK(p.length() == doctest::Approx(L));
  CHECK(p.cruise_speed() <= vmax + 1e-12);

  const auto s0 = p.eval(0.0);
  const auto sT = p.eval(T);
  CHECK(s0.position == doctest::Approx(0.0));
  CHECK(std::abs(s0.velocity) < 1e-12);
  CHECK(std::abs(s0.acceleration) < 1e-12);
  CHECK(sT.position == doctest::Approx(L));
  CHECK(std::abs(sT.velocity) < 1e-12);
  CHECK(std::abs(sT.acceleration) < 1e-12);

  // Midpoint: half the distance, at cruise speed.
  const auto mid = p.eval(T / 2.0);
  CHECK(mid.position == doctest::Approx(L / 2.0));
  CHECK(mid.velocity == doctest::Approx(p.cruise_speed()));
}

TEST_CASE("ScalarProfile: throws when the needed cruise speed exceeds v_max") {
  CHECK_THROWS_AS(ScalarProfile::make(1.0, 1.0, 0.5), DurationTooShort);
  CHECK(ScalarProfile::min_duration(1.0, 0.5) == doctest::Approx(1.0 / (0.5 * 0.75)));
}

TEST_CASE("ScalarProfile: acceleration is continuous across blend boundaries") {
  const ScalarProfile p = ScalarProfile::make(0.8, 6.0, 0.3);
  const double h = 1e-4;
  double peak = 0.0;
  for (double t = h; t < p.duration() - h; t += h)
    peak = std::max(peak, std::abs(p.eval(t).acceleration));
  REQUIRE(peak > 0.0);
  double max_jump = 0.0;
  for (double t = 2 * h; t < p.duration() - 2 * h; t += h) {
    const double jump = std::abs(p.eval(t).acceleration - p.eval(t - h).acceleration);
    max_jump = std::max(max_jump, jump);
  }
  // C2: adjacent-sample acceleration differences shrink with h; jumps stay a
  // tiny fraction of the peak.
  CHECK(max_jump < 1e-2 * peak);
}

TEST_CASE("BaseTrajectory: constant pose when start equals goal") {
  Pose p = grasp_at(1, 2, 3);
  const BaseTrajectory traj(p, p, 4.0, 0.15);
  for (double t : {0.0, 1.3, 4.0}) {
    const PoseSample s = traj.sample(t);
    CHECK((s.pose.translation - p.translation).norm() < 1e-12);
    CHECK(s.twist.linear.norm() < 1e-12);
    CHECK(s.twist.angular.norm() < 1e-12);
  }
}

TEST_CASE("BaseTrajectory: 1 m straight line, symmetric profile, C2 acceleration") {
  const Pose a = grasp_at(0, 0, 0);
  const Pose b = grasp_at(1, 0, 0);
  const double T = 10.0;
  const BaseTrajectory traj(a, b, T, 0.15);

  const PoseSample mid = traj.sample(T / 2.0);
  CHECK(mid.pose.translation.x() == doctest::Approx(0.5));
  CHECK(mid.twist.linear.x() > 0.0);

  // Endpoint twist and acceleration vanish.
  for (double t : {0.0, T}) {
    const PoseSample s = traj.sample(t);
    CHECK(s.twist.linear.norm() < 1e-9);
    CHECK(s.linear_acceleration.norm() < 1e-9);
  }

  // Finite-difference acceleration continuity (acceptance-style bound).
  const double h = 1e-4;
  double peak = 0.0, max_jump = 0.0;
  double prev = traj.sample(h).linear_acceleration.x();
  for (double t = 2 * h; t < T; t += h) {
    const double acc = traj.sample(t).linear_acceleration.x();
    peak = std::max(peak, std::abs(acc));
    max_jump = std::max(max_jump, std::abs(acc - prev));
    prev = acc;
  }
  CHECK(max_jump < 1e-2 * peak);

  // Trapezoidal integration of sampled velocity reconstructs the displacement.
  double integral = 0.0;
  const double dt = 1e-3;
  for (double t = 0.0; t + dt <= T + 1e-12; t += dt) {
    integral +=
        0.5 * dt * (traj.sample(t).twist.linear.x() + traj.sample(t + dt).twist.linear.x());
  }
  CHECK(std::abs(integral - 1.0) < 1e-4);
}

TEST_CASE("SwingPath: degenerate transfer collapses the traverse stage") {
  const Pose c = grasp_at(0.3, 0.9, 0.0);
  const SwingPath path(c, c, 0.1);
  CHECK(path.stage_lengths()[1] == doctest::Approx(0.0));
  CHECK(path.stage_lengths()[0] == doctest::Approx(0.1));
  CHECK(path.stage_lengths()[2] == doctest::Approx(0.1));
}

TEST_CASE("SwingPath: coplanar identical-normal contacts traverse at the clearance height") {
  const double c = 0.1;
  const Pose from = grasp_at(0.0, 0.9, 0.0);
  const Pose to = grasp_at(0.6, 0.9, 0.0);
  const SwingPath path(from, to, c);

  // The detach stage climbs the contact normal; corner rounding bends only
  // a small window around the stage boundary, so just before the window the
  // path is exactly on the vertical segment, and at the boundary it sits
  // within the blend radius of the ideal corner.
  const Pose before_corner = path.pose_at_arc(0.4 * path.stage_lengths()[0]);
  CHECK((before_corner.translation -
         (from.translation + 0.4 * path.stage_lengths()[0] * Eigen::Vector3d::UnitZ()))
            .norm() < 1e-9);
  const Pose detach_end = path.pose_at_arc(path.stage_lengths()[0]);
  const Eigen::Vector3d corner = from.translation + c * Eigen::Vector3d::UnitZ();
  CHECK((detach_end.translation - corner).norm() < 0.5 * c);

  // Sample the middle of the traverse: straight segment at height c. The
  // corner blends round only a neighborhood of the stage boundaries.
  const double s_mid = path.stage_lengths()[0] + 0.5 * path.stage_lengths()[1];
  int stage = 0;
  const Pose mid = path.pose_at_arc(s_mid, &stage);
  CHECK(stage == 3);
  CHECK(mid.translation.z() == doctest::Approx(c).epsilon(1e-9));
  CHECK(mid.translation.y() == doctest::Approx(0.9).epsilon(1e-9));

  // Endpoints are exact.
  CHECK((path.pose_at_arc(0.0).translation - from.translation).norm() < 1e-12);
  CHECK((path.pose_at_arc(path.total_length()).translation - to.translation).norm() < 1e-9);
}

TEST_CASE("SwingPath: rounded corners keep the translation C1") {
  const Pose from = grasp_at(0.0, 0.9, 0.0);
  const Pose to = grasp_at(0.6, 0.95, 0.05);
  const SwingPath path(from, to, 0.1);
  const double h = 1e-5;
  double max_tangent_jump = 0.0;
  Eigen::Vector3d prev_tangent = (path.pose_at_arc(h).translation -
                                  path.pose_at_arc(0.0).translation) / h;
  for (double s = 2 * h; s < path.total_length(); s += path.total_length() / 2000.0) {
    const Eigen::Vector3d tangent =
        (path.pose_at_arc(s).translation - path.pose_at_arc(s - h).translation) / h;
    max_tangent_jump = std::max(max_tangent_jump, (tangent - prev_tangent).norm());
    prev_tangent = tangent;
  }
  // A C0 corner would show an O(1) tangent jump between adjacent samples.
  CHECK(max_tangent_jump < 0.2);
}

TEST_CASE("TimedSwing: stage-time proportionality is exact") {
  // Stage lengths (0.1, 0.4, 0.1) with motion time 1.2 s -> (0.2, 0.8, 0.2).
  const Pose from = grasp_at(0.0, 0.9, 0.0);
  const Pose to = grasp_at(0.4, 0.9, 0.0);
  const SwingPath path(from, to, 0.1);
  REQUIRE(path.stage_lengths()[0] == doctest::Approx(0.1));
  REQUIRE(path.stage_lengths()[1] == doctest::Approx(0.4));
  REQUIRE(path.stage_lengths()[2] == doctest::Approx(0.1));

  const double release = 0.1, grasp = 0.1, motion = 1.2;
  const TimedSwing swing(path, motion + release + grasp, release, grasp);
  const auto d = swing.stage_durations();
  CHECK(d[0] == doctest::Approx(0.2));
  CHECK(d[1] == doctest::Approx(0.8));
  CHECK(d[2] == doctest::Approx(0.2));
  CHECK(swing.motion_duration() == doctest::Approx(motion));
}

TEST_CASE("TimedSwing: rest-to-rest boundaries and quintic midpoint symmetry") {
  const Pose from = grasp_at(0.0, 0.9, 0.0);
  const Pose to = grasp_at(0.6, 0.9, 0.0);
  const SwingPath path(from, to, 0.1);
  const double release = 0.1, grasp = 0.1;
  const TimedSwing swing(path, 2.0, release, grasp);

  // Boundaries of the motion (start of detach, end of attach) are at rest.
  for (double t : {release, 2.0 - grasp}) {
    const auto s = swing.sample(t);
    CHECK(s.twist.linear.norm() < 1e-9);
    CHECK(s.linear_acceleration.norm() < 1e-9);
  }
  // Gripper stages hold pose.
  CHECK((swing.sample(0.0).pose.translation - from.translation).norm() < 1e-12);
  CHECK((swing.sample(0.05).pose.translation - from.translation).norm() < 1e-12);
  CHECK((swing.sample(2.0).pose.translation - to.translation).norm() < 1e-9);

  // Quintic midpoint: half the arc length.
  const double t_mid = release + swing.motion_duration() / 2.0;
  const auto mid = swing.sample(t_mid);
  const Pose expect = path.pose_at_arc(path.total_length() / 2.0);
  CHECK((mid.pose.translation - expect.translation).norm() < 1e-9);
}

TEST_CASE("TimedSwing: stage labels run 1..5 in order") {
  const Pose from = grasp_at(0.0, 0.9, 0.0);
  const Pose to = grasp_at(0.6, 0.9, 0.0);
  const TimedSwing swing(SwingPath(from, to, 0.1), 2.0, 0.1, 0.1);
  int last = 0;
  bool saw[6] = {false, false, false, false, false, false};
  for (double t = 0.0; t <= 2.0 + 1e-12; t += 1e-3) {
    const int stage = swing.sample(std::min(t, 2.0)).stage;
    CHECK(stage >= last);  // nondecreasing
    CHECK(stage >= 1);
    CHECK(stage <= 5);
    saw[stage] = true;
    last = stage;
  }
  for (int k = 1; k <= 5; ++k) CHECK(saw[k]);
}

TEST_CASE("StrideTrajectory: endpoints and stance holds") {
  GaitParams params;
  const Pose base_start = grasp_at(0.0, 0.0, 0.8);
  const Pose base_goal = grasp_at(0.3, 0.0, 0.8);
  std::array<Pose, 4> current = {grasp_at(0.35, 0.9, 0), grasp_at(0.35, -0.9, 0),
                                 grasp_at(-0.35, 0.9, 0), grasp_at(-0.35, -0.9, 0)};
  std::array<Pose, 4> target = current;
  for (auto& p : target) p.translation.x() += 0.3;

  std::array<double, 4> dists{};
  for (int limb = 0; limb < 4; ++limb) {
    const SwingPath sp(current[limb], target[limb], params.ee_clearance);
    dists[limb] = sp.total_length();
  }
  const SwingSchedule sched = build_schedule(params, {0, 3, 1, 2}, dists, 0.3);
  const StrideTrajectory traj =
      build_stride_trajectory(base_start, base_goal, current, target, sched, params);

  CHECK(traj.duration() == doctest::Approx(sched.stride_duration));
  // t = 0: start poses, zero twists.
  const PoseSample b0 = traj.sample_base(0.0);
  CHECK((b0.pose.translation - base_start.translation).norm() < 1e-12);
  CHECK(b0.twist.linear.norm() < 1e-9);
  // t = duration: goal poses.
  const PoseSample bT = traj.sample_base(traj.duration());
  CHECK((bT.pose.translation - base_goal.translation).norm() < 1e-9);

  for (int limb = 0; limb < 4; ++limb) {
    const auto s0 = traj.sample_limb(limb, 0.0);
    const auto sT = traj.sample_limb(limb, traj.duration());
    CHECK((s0.pose.translation - current[limb].translation).norm() < 1e-9);
    CHECK((sT.pose.translation - target[limb].translation).norm() < 1e-9);
    // Before its swing window the limb holds its grasp.
    const double before = 0.5 * sched.start_time[limb];
    const auto hold = traj.sample_limb(limb, before);
    if (sched.start_time[limb] > 1e-9) {
      CHECK_FALSE(hold.in_swing);
      CHECK((hold.pose.translation - current[limb].translation).norm() < 1e-12);
    }
  }
}

TEST_CASE("stride_trajectory_csv produces one row per sample") {
  GaitParams params;
  const Pose base_start = grasp_at(0.0, 0.0, 0.8);
  const Pose base_goal = grasp_at(0.2, 0.0, 0.8);
  std::array<Pose, 4> current = {grasp_at(0.35, 0.9, 0), grasp_at(0.35, -0.9, 0),
                                 grasp_at(-0.35, 0.9, 0), grasp_at(-0.35, -0.9, 0)};
  std::array<Pose, 4> target = current;
  for (auto& p : target) p.translation.x() += 0.2;
  std::array<double, 4> dists{};
  for (int limb = 0; limb < 4; ++limb)
    dists[limb] = SwingPath(current[limb], target[limb], params.ee_clearance).total_length();
  const SwingSchedule sched = build_schedule(params, {0, 3, 1, 2}, dists, 0.2);
  const StrideTrajectory traj =
      build_stride_trajectory(base_start, base_goal, current, target, sched, params);

  const std::string csv = stride_trajectory_csv(traj, 0.1);
  const size_t rows = static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows >= static_cast<size_t>(traj.duration() / 0.1));
  CHECK(csv.find("t,") == 0);
}
