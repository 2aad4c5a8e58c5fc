#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "microgait/contact_wrench.hpp"
#include "microgait/environment.hpp"
#include "microgait/robot_model.hpp"
#include "microgait/spatial.hpp"

namespace microgait {

enum class SwingOrderMode { Opt, Amble, Trot, Fixed };
enum class OverlapMode { Fraction, Opt, None, FullPair };

const char* swing_order_mode_name(SwingOrderMode m);
const char* overlap_mode_name(OverlapMode m);

struct GaitParams {
  SwingOrderMode swing_order_mode = SwingOrderMode::Opt;
  std::array<int, 4> fixed_order{0, 3, 1, 2};  // used by Fixed mode
  OverlapMode overlap_mode = OverlapMode::Fraction;
  double overlap_fraction = 0.30;  // of the shorter swing in each pair
  double stride_length = 0.6;      // m
  double base_speed_max = 0.15;    // m/s
  double swing_speed_max = 1.0;    // m/s
  double nominal_base_height = 0.8;  // m above the contact plane
  double ee_clearance = 0.1;         // m
  double gripper_release_duration = 0.1;  // sigma_1, s
  double gripper_grasp_duration = 0.1;    // sigma_5, s
  double max_overlap_fraction = 0.5;      // cap used by Opt overlap
};

struct StrideGoal {
  std::array<int, 4> target_anchor{-1, -1, -1, -1};  // indices into env.anchors
  std::array<Pose, 4> target_contact_pose;           // world grasp poses
  Pose target_base_pose;
  Plane contact_plane;
};

// Per-limb swing windows within one stride. order[k] is the limb swinging
// k-th. Overlap exists only between swing positions (1,2) and (3,4).
struct SwingSchedule {
  std::array<int, 4> order{0, 1, 2, 3};
  std::array<double, 4> start_time{};  // indexed by limb, seconds
  std::array<double, 4> end_time{};
  double overlap_12 = 0.0;  // s
  double overlap_34 = 0.0;
  double stride_duration = 0.0;

  double start_phase(int limb) const { return start_time[limb] / stride_duration; }
  double end_phase(int limb) const { return end_time[limb] / stride_duration; }
};

struct NoCandidates : std::runtime_error {
  int limb;
  explicit NoCandidates(int limb_index)
      : std::runtime_error("no candidate anchors for limb"), limb(limb_index) {}
};

struct InfeasibleSchedule : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MotionPlanningFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Side limb_side(int limb) { return (limb == 0 || limb == 2) ? Side::Left : Side::Right; }

// Constructs a stride goal: top-ranked anchor per limb (unique), best-fit
// contact plane, and the target base pose derived from it.
StrideGoal plan_stride_goal(const Environment& env, const Pose& base_pose,
                            const std::array<Eigen::Vector3d, 4>& current_contact_positions,
                            const RobotModel& model, const GaitParams& params);

// Target base pose from the four target contact poses: z = plane normal, yaw
// bisects the left/right limb-set directions, origin at the in-plane contact
// centroid offset by the nominal height.
Pose target_base_pose_from_contacts(const std::array<Pose, 4>& contact_poses,
                                    const Pose& current_base_pose, double nominal_height,
                                    Plane* plane_out = nullptr);

// One support configuration held for `duration` seconds.
struct ScoredInterval {
  ContactSet contacts;
  double duration = 0.0;
};

using ContactSequenceFn =
    std::function<std::vector<ScoredInterval>(const std::array<int, 4>& order)>;
using ScoreFn = std::function<double(const ContactSet&)>;

struct OrderChoice {
  std::array<int, 4> order{0, 1, 2, 3};
  double min_score = 0.0;
  double weighted_mean_score = 0.0;
};

// Exhaustive search over all 24 orders. Value = minimum configuration score
// over the stride; ties break on duration-weighted mean, then lexicographic.
OrderChoice optimize_swing_order(const ContactSequenceFn& sequence_fn, const ScoreFn& score_fn);

// Swing windows from per-limb swing distances (indexed by limb) and the base
// displacement of the stride.
SwingSchedule build_schedule(const GaitParams& params, const std::array<int, 4>& order,
                             const std::array<double, 4>& swing_distances,
                             double base_displacement);

// Canonical orders (limb indices: 0 LF, 1 RF, 2 LH, 3 RH).
std::array<int, 4> amble_order();  // LF, RH, RF, LH
std::array<int, 4> trot_order();   // diagonal pairs (LF, RH) then (RF, LH)

enum class FailureStage { KeyStageIk, NearSingularity, DenseIk };

struct FailureInfo {
  FailureStage stage = FailureStage::KeyStageIk;
  int limb = -1;
};

// Deterministic retry sequence over swing orders (unless the order mode is
// canonical) and per-limb alternate anchors. Exhaustion means the trial is a
// motion-planning failure.
class PlanModifier {
 public:
  PlanModifier(const Environment& env, const RobotModel& model, const GaitParams& params,
               const Pose& current_base_pose, const StrideGoal& initial_goal,
               const std::array<std::vector<RankedAnchor>, 4>& ranked_candidates,
               const std::vector<std::array<int, 4>>& orders_by_score);

  // Applies the next modification for `failure`. Returns nullopt when all
  // candidate modifications are exhausted.
  std::optional<std::pair<StrideGoal, std::array<int, 4>>> next(const FailureInfo& failure);

  static constexpr int kMaxAnchorAlternates = 5;

 private:
  const Environment& env_;
  const GaitParams& params_;
  StrideGoal goal_;
  Pose current_base_pose_;
  double nominal_height_;
  std::array<std::vector<RankedAnchor>, 4> candidates_;
  std::vector<std::array<int, 4>> orders_;
  size_t order_cursor_ = 0;
  std::array<int, 4> anchor_cursor_{0, 0, 0, 0};
  bool order_adjustment_enabled_ = true;
};

}  // namespace microgait
