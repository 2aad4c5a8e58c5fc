#include "microgait/gait_planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace microgait {

const char* swing_order_mode_name(SwingOrderMode m) {
  switch (m) {
    case SwingOrderMode::Opt: return "opt";
    case SwingOrderMode::Amble: return "amble";
    case SwingOrderMode::Trot: return "trot";
    case SwingOrderMode::Fixed: return "fixed";
  }
  return "?";
}

const char* overlap_mode_name(OverlapMode m) {
  switch (m) {
    case OverlapMode::Fraction: return "fraction";
    case OverlapMode::Opt: return "opt";
    case OverlapMode::None: return "none";
    case OverlapMode::FullPair: return "full_pair";
  }
  return "?";
}

std::array<int, 4> amble_order() { return {0, 3, 1, 2}; }  // LF, RH, RF, LH
std::array<int, 4> trot_order() { return {0, 3, 1, 2}; }   // (LF,RH) pair, (RF,LH) pair

Pose target_base_pose_from_contacts(const std::array<Pose, 4>& contact_poses,
                                    const Pose& current_base_pose, double nominal_height,
                                    Plane* plane_out) {
  std::vector<Eigen::Vector3d> points;
  for (const auto& p : contact_poses) points.push_back(p.translation);
  const Plane plane = best_fit_plane(points, current_base_pose.rotation.col(2));
  if (plane_out) *plane_out = plane;

  auto project = [&plane](const Eigen::Vector3d& v) {
    return (v - plane.normal.dot(v) * plane.normal).eval();
  };
  // Left set: LF(0), LH(2); right set: RF(1), RH(3). Forward direction of a
  // side = hind-to-front contact vector projected onto the plane.
  Eigen::Vector3d left_dir = project(contact_poses[0].translation - contact_poses[2].translation);
  Eigen::Vector3d right_dir = project(contact_poses[1].translation - contact_poses[3].translation);
  if (left_dir.norm() < 1e-9) left_dir = project(current_base_pose.rotation.col(0));
  if (right_dir.norm() < 1e-9) right_dir = project(current_base_pose.rotation.col(0));
  Eigen::Vector3d heading = left_dir.normalized() + right_dir.normalized();
  if (heading.norm() < 1e-9) heading = project(current_base_pose.rotation.col(0));
  heading.normalize();

  Pose base;
  base.rotation.col(2) = plane.normal;
  base.rotation.col(0) = heading;
  base.rotation.col(1) = plane.normal.cross(heading);
  base.rotation = orthonormalize(base.rotation);

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= 4.0;
  const Eigen::Vector3d in_plane = centroid - plane.normal.dot(centroid - plane.centroid) * plane.normal;
  base.translation = in_plane + nominal_height * plane.normal;
  return base;
}

StrideGoal plan_stride_goal(const Environment& env, const Pose& base_pose,
                            const std::array<Eigen::Vector3d, 4>& current_contact_positions,
                            const RobotModel& model, const GaitParams& params) {
  StrideGoal goal;
  std::set<int> taken;
  for (int limb = 0; limb < 4; ++limb) {
    const Pose mount_world = base_pose * model.mount_poses[limb];
    const auto ranked =
        candidate_anchors(env, mount_world, current_contact_positions[limb], params.stride_length,
                          model.limbs[limb].reach(), limb_side(limb));
    int chosen = -1;
    for (const auto& ra : ranked) {
      if (!taken.count(ra.anchor_index)) {
        chosen = ra.anchor_index;
        break;
      }
    }
    if (chosen < 0) throw NoCandidates(limb);
    taken.insert(chosen);
    goal.target_anchor[limb] = chosen;
    goal.target_contact_pose[limb] = env.anchors[chosen].grasp_pose;
  }
  goal.target_base_pose = target_base_pose_from_contacts(
      goal.target_contact_pose, base_pose, params.nominal_base_height, &goal.contact_plane);
  return goal;
}

OrderChoice optimize_swing_order(const ContactSequenceFn& sequence_fn, const ScoreFn& score_fn) {
  std::array<int, 4> perm{0, 1, 2, 3};
  OrderChoice best;
  bool have_best = false;
  do {
    const auto intervals = sequence_fn(perm);
    double min_score = std::numeric_limits<double>::infinity();
    double weighted = 0.0;
    double total = 0.0;
    for (const auto& iv : intervals) {
      const double s = score_fn(iv.contacts);
      min_score = std::min(min_score, s);
      weighted += s * iv.duration;
      total += iv.duration;
    }
    if (intervals.empty()) min_score = 0.0;
    const double mean = total > 0.0 ? weighted / total : 0.0;
    const bool better = !have_best || min_score > best.min_score + 1e-12 ||
                        (std::abs(min_score - best.min_score) <= 1e-12 &&
                         mean > best.weighted_mean_score + 1e-12);
    if (better) {
      best = OrderChoice{perm, min_score, mean};
      have_best = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

SwingSchedule build_schedule(const GaitParams& params, const std::array<int, 4>& order,
                             const std::array<double, 4>& swing_distances,
                             double base_displacement) {
  for (double d : swing_distances) {
    if (d < 0.0) throw InfeasibleSchedule("negative swing distance");
  }
  if (params.swing_speed_max <= 0.0 || params.base_speed_max <= 0.0) {
    throw InfeasibleSchedule("nonpositive speed limit");
  }

  SwingSchedule sched;
  sched.order = order;

  std::array<double, 4> dur{};  // by swing position
  for (int k = 0; k < 4; ++k) {
    dur[k] = swing_distances[order[k]] / params.swing_speed_max +
             params.gripper_release_duration + params.gripper_grasp_duration;
  }

  // Minimum stride duration imposed by the base profile (the blended
  // trapezoid caps peak speed at v_max, so the mean speed is lower).
  constexpr double kBlendFraction = 0.25;
  const double base_time =
      base_displacement / (params.base_speed_max * (1.0 - kBlendFraction));

  auto pair_cap = [&](int a, int b) { return std::min(dur[a], dur[b]); };
  double a1 = 0.0;
  double a2 = 0.0;
  switch (params.overlap_mode) {
    case OverlapMode::None:
      break;
    case OverlapMode::Fraction:
      if (params.overlap_fraction < 0.0 || params.overlap_fraction >= 1.0) {
        throw InfeasibleSchedule("overlap fraction outside [0, 1)");
      }
      a1 = params.overlap_fraction * pair_cap(0, 1);
      a2 = params.overlap_fraction * pair_cap(2, 3);
      break;
    case OverlapMode::FullPair:
      a1 = pair_cap(0, 1);
      a2 = pair_cap(2, 3);
      break;
    case OverlapMode::Opt: {
      // Smallest overlaps that let the swings fit inside the base-driven
      // stride time, capped at the maximum allowable fraction.
      const double cap1 = params.max_overlap_fraction * pair_cap(0, 1);
      const double cap2 = params.max_overlap_fraction * pair_cap(2, 3);
      double need = dur[0] + dur[1] + dur[2] + dur[3] - base_time;
      if (need > 0.0) {
        a1 = std::min(need / 2.0, cap1);
        a2 = std::min(need - a1, cap2);
        const double left_over = need - a1 - a2;
        if (left_over > 0.0 && a1 < cap1) a1 = std::min(a1 + left_over, cap1);
      }
      break;
    }
  }
  sched.overlap_12 = a1;
  sched.overlap_34 = a2;

  // Swing window layout; transition (2,3) carries zero overlap.
  std::array<double, 4> start{};
  std::array<double, 4> end{};
  start[0] = 0.0;
  end[0] = dur[0];
  start[1] = end[0] - a1;
  end[1] = start[1] + dur[1];
  start[2] = std::max(end[0], end[1]);
  end[2] = start[2] + dur[2];
  start[3] = end[2] - a2;
  end[3] = start[3] + dur[3];
  const double critical_path = std::max(end[2], end[3]);

  sched.stride_duration = std::max(base_time, critical_path);

  // Distribute slack as equal gaps: lead-in, between the pairs, and tail.
  const double gap = (sched.stride_duration - critical_path) / 3.0;
  for (int k = 0; k < 4; ++k) {
    const double shift = k < 2 ? gap : 2.0 * gap;
    sched.start_time[order[k]] = start[k] + shift;
    sched.end_time[order[k]] = end[k] + shift;
  }
  return sched;
}

PlanModifier::PlanModifier(const Environment& env, const RobotModel& model,
                           const GaitParams& params, const Pose& current_base_pose,
                           const StrideGoal& initial_goal,
                           const std::array<std::vector<RankedAnchor>, 4>& ranked_candidates,
                           const std::vector<std::array<int, 4>>& orders_by_score)
    : env_(env),
      params_(params),
      goal_(initial_goal),
      current_base_pose_(current_base_pose),
      nominal_height_(params.nominal_base_height),
      candidates_(ranked_candidates),
      orders_(orders_by_score) {
  (void)model;
  order_adjustment_enabled_ = params.swing_order_mode == SwingOrderMode::Opt;
  // Anchor cursor starts past the anchor already selected for each limb.
  for (int limb = 0; limb < 4; ++limb) {
    int idx = 0;
    for (const auto& ra : candidates_[limb]) {
      ++idx;
      if (ra.anchor_index == goal_.target_anchor[limb]) break;
    }
    anchor_cursor_[limb] = idx;
  }
}

std::optional<std::pair<StrideGoal, std::array<int, 4>>> PlanModifier::next(
    const FailureInfo& failure) {
  // First exhaust alternative swing orders, then fall back to alternate
  // anchors for the failing limb (canonical orders skip the first step).
  if (order_adjustment_enabled_ && order_cursor_ + 1 < orders_.size()) {
    ++order_cursor_;
    return std::make_pair(goal_, orders_[order_cursor_]);
  }
  const int limb = failure.limb;
  if (limb >= 0 && limb < 4) {
    int tried = 0;
    while (anchor_cursor_[limb] < static_cast<int>(candidates_[limb].size()) &&
           tried < kMaxAnchorAlternates) {
      const RankedAnchor& ra = candidates_[limb][anchor_cursor_[limb]++];
      ++tried;
      bool in_use = false;
      for (int l = 0; l < 4; ++l) {
        if (l != limb && goal_.target_anchor[l] == ra.anchor_index) in_use = true;
      }
      if (in_use) continue;
      goal_.target_anchor[limb] = ra.anchor_index;
      goal_.target_contact_pose[limb] = env_.anchors[ra.anchor_index].grasp_pose;
      goal_.target_base_pose = target_base_pose_from_contacts(
          goal_.target_contact_pose, current_base_pose_, nominal_height_, &goal_.contact_plane);
      const auto order =
          orders_.empty() ? std::array<int, 4>{0, 1, 2, 3} : orders_[order_cursor_];
      return std::make_pair(goal_, order);
    }
  }
  return std::nullopt;
}

}  // namespace microgait
