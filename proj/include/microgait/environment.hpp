#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "microgait/spatial.hpp"

namespace microgait {

struct Handrail {
  Pose pose;            // world; local x = rail axis
  double length = 0.30; // m
  double radius = 0.015;

  Eigen::Vector3d axis() const { return pose.rotation.col(0); }
};

enum class Side { Left, Right };

struct Anchor {
  Pose grasp_pose;        // world; z = outward normal, x = rail axis
  int parent_handrail = -1;
  Side side = Side::Left;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct EnvironmentSpec {
  double target_distance = 10.0;        // m of forward (x) traversal to cover
  Range x_offset_range{0.275, 0.325};   // successive pair spacing
  Range y_offset_range{-0.15, 0.15};
  Range z_offset_range{-0.10, 0.10};
  double max_rotation = 22.5 * M_PI / 180.0;  // per-axis handrail rotation
  Range pair_y_separation_range{1.6, 2.0};
  Range pair_xz_offset_range{-0.15, 0.15};    // within-pair relative offsets
  double handrail_length = 0.30;
  double handrail_radius = 0.015;
  double anchor_spacing = 0.10;  // extra anchors along each rail; 0 = center only
  double overrun = 2.0;          // rails generated past target_distance
  std::uint64_t seed = 0;
};

struct Environment {
  EnvironmentSpec spec;
  std::vector<Handrail> handrails;
  std::vector<Anchor> anchors;
  int pair_count = 0;
};

// Deterministic for a fixed seed; offsets accumulate pair to pair and every
// draw stays inside its declared range.
Environment generate_environment(const EnvironmentSpec& spec);

struct RankedAnchor {
  int anchor_index = -1;
  double progress = 0.0;  // forward (x) travel relative to search center
  double rank_cost = 0.0; // |progress - stride_length|
};

// Anchors on `side`, within `limb_reach` of the mount, ranked by closeness of
// their forward progress to the prescribed stride length.
std::vector<RankedAnchor> candidate_anchors(const Environment& env, const Pose& limb_mount_world,
                                            const Eigen::Vector3d& search_center,
                                            double stride_length, double limb_reach, Side side);

std::string environment_to_json(const Environment& env);
Environment environment_from_json(const std::string& text);

}  // namespace microgait
