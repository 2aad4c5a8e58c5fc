#include "microgait/environment.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"

namespace microgait {

namespace {

// Uniform draws from raw mt19937_64 bits; std::uniform_real_distribution is
// implementation-defined, which would break cross-build reproducibility.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(const Range& r) {
    const double u = (gen() >> 11) * (1.0 / 9007199254740992.0);
    return r.lo + u * (r.hi - r.lo);
  }
  double uniform(double lo, double hi) { return uniform(Range{lo, hi}); }
};

Eigen::Matrix3d rpy_rotation(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

void add_handrail_anchors(Environment& env, int rail_index, Side side) {
  const Handrail& rail = env.handrails[rail_index];
  std::vector<double> offsets{0.0};
  if (env.spec.anchor_spacing > 0.0) {
    for (double s = env.spec.anchor_spacing; s <= rail.length / 2.0 + 1e-12;
         s += env.spec.anchor_spacing) {
      offsets.push_back(s);
      offsets.push_back(-s);
    }
  }
  std::sort(offsets.begin(), offsets.end());
  const Eigen::Vector3d axis = rail.axis();
  // Outward normal: world-up component perpendicular to the rail axis.
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ() - Eigen::Vector3d::UnitZ().dot(axis) * axis;
  if (normal.norm() < 1e-9) normal = rail.pose.rotation.col(2);
  normal.normalize();
  for (double s : offsets) {
    Anchor a;
    a.parent_handrail = rail_index;
    a.side = side;
    a.grasp_pose.translation = rail.pose.translation + s * axis + rail.radius * normal;
    Eigen::Matrix3d R;
    R.col(0) = axis;
    R.col(2) = normal;
    R.col(1) = normal.cross(axis);
    a.grasp_pose.rotation = R;
    env.anchors.push_back(a);
  }
}

}  // namespace

Environment generate_environment(const EnvironmentSpec& spec) {
  Environment env;
  env.spec = spec;
  Rng rng(spec.seed);

  Eigen::Vector3d center(0.0, 0.0, 0.0);
  bool first = true;
  while (center.x() < spec.target_distance + spec.overrun) {
    if (!first) {
      center.x() += rng.uniform(spec.x_offset_range);
      center.y() += rng.uniform(spec.y_offset_range);
      center.z() += rng.uniform(spec.z_offset_range);
    }
    first = false;

    const double y_sep = rng.uniform(spec.pair_y_separation_range);
    const double rel_x = rng.uniform(spec.pair_xz_offset_range);
    const double rel_z = rng.uniform(spec.pair_xz_offset_range);

    auto make_rail = [&](const Eigen::Vector3d& pos) {
      Handrail rail;
      rail.length = spec.handrail_length;
      rail.radius = spec.handrail_radius;
      rail.pose.translation = pos;
      const double roll = rng.uniform(-spec.max_rotation, spec.max_rotation);
      const double pitch = rng.uniform(-spec.max_rotation, spec.max_rotation);
      const double yaw = rng.uniform(-spec.max_rotation, spec.max_rotation);
      rail.pose.rotation = rpy_rotation(roll, pitch, yaw);
      return rail;
    };

    const Handrail left = make_rail(center + Eigen::Vector3d(0.0, y_sep / 2.0, 0.0));
    const Handrail right = make_rail(center + Eigen::Vector3d(rel_x, -y_sep / 2.0, rel_z));
    env.handrails.push_back(left);
    add_handrail_anchors(env, static_cast<int>(env.handrails.size()) - 1, Side::Left);
    env.handrails.push_back(right);
    add_handrail_anchors(env, static_cast<int>(env.handrails.size()) - 1, Side::Right);
    ++env.pair_count;
  }
  return env;
}

std::vector<RankedAnchor> candidate_anchors(const Environment& env, const Pose& limb_mount_world,
                                            const Eigen::Vector3d& search_center,
                                            double stride_length, double limb_reach, Side side) {
  std::vector<RankedAnchor> out;
  for (int i = 0; i < static_cast<int>(env.anchors.size()); ++i) {
    const Anchor& a = env.anchors[i];
    if (a.side != side) continue;
    if ((a.grasp_pose.translation - limb_mount_world.translation).norm() > limb_reach) continue;
    // The base advances roughly one stride while this grasp is held; an
    // anchor that only works from the pre-stride mount position strands the
    // limb behind the body. Require reachability from the post-stride mount
    // too, with headroom for mid-stride stretch.
    const Eigen::Vector3d future_mount =
        limb_mount_world.translation + stride_length * Eigen::Vector3d::UnitX();
    if ((a.grasp_pose.translation - future_mount).norm() > 0.95 * limb_reach) continue;
    RankedAnchor ra;
    ra.anchor_index = i;
    ra.progress = a.grasp_pose.translation.x() - search_center.x();
    ra.rank_cost = std::abs(ra.progress - stride_length);
    out.push_back(ra);
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedAnchor& a, const RankedAnchor& b) {
    if (a.rank_cost != b.rank_cost) return a.rank_cost < b.rank_cost;
    return a.anchor_index < b.anchor_index;
  });
  return out;
}

namespace {

nlohmann::json pose_to_json(const Pose& p) {
  const Eigen::Quaterniond q = pose_quaternion(p);
  return {{"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"rotation_quaternion", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  const auto& t = j.at("translation");
  const auto& q = j.at("rotation_quaternion");
  return pose_from_quaternion(
      Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                         q.at(3).get<double>()),
      Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()));
}

}  // namespace

std::string environment_to_json(const Environment& env) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["spec"] = {{"target_distance", env.spec.target_distance},
               {"x_offset_range", {env.spec.x_offset_range.lo, env.spec.x_offset_range.hi}},
               {"y_offset_range", {env.spec.y_offset_range.lo, env.spec.y_offset_range.hi}},
               {"z_offset_range", {env.spec.z_offset_range.lo, env.spec.z_offset_range.hi}},
               {"max_rotation", env.spec.max_rotation},
               {"pair_y_separation_range",
                {env.spec.pair_y_separation_range.lo, env.spec.pair_y_separation_range.hi}},
               {"pair_xz_offset_range",
                {env.spec.pair_xz_offset_range.lo, env.spec.pair_xz_offset_range.hi}},
               {"handrail_length", env.spec.handrail_length},
               {"handrail_radius", env.spec.handrail_radius},
               {"anchor_spacing", env.spec.anchor_spacing},
               {"overrun", env.spec.overrun},
               {"seed", env.spec.seed}};
  j["pair_count"] = env.pair_count;
  j["handrails"] = nlohmann::json::array();
  for (const auto& rail : env.handrails) {
    j["handrails"].push_back(
        {{"pose", pose_to_json(rail.pose)}, {"length", rail.length}, {"radius", rail.radius}});
  }
  j["anchors"] = nlohmann::json::array();
  for (const auto& a : env.anchors) {
    j["anchors"].push_back({{"grasp_pose", pose_to_json(a.grasp_pose)},
                            {"parent_handrail", a.parent_handrail},
                            {"side", a.side == Side::Left ? "left" : "right"}});
  }
  return j.dump(2);
}

Environment environment_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Environment env;
  const auto& s = j.at("spec");
  auto range = [&s](const char* key) {
    return Range{s.at(key).at(0).get<double>(), s.at(key).at(1).get<double>()};
  };
  env.spec.target_distance = s.at("target_distance").get<double>();
  env.spec.x_offset_range = range("x_offset_range");
  env.spec.y_offset_range = range("y_offset_range");
  env.spec.z_offset_range = range("z_offset_range");
  env.spec.max_rotation = s.at("max_rotation").get<double>();
  env.spec.pair_y_separation_range = range("pair_y_separation_range");
  env.spec.pair_xz_offset_range = range("pair_xz_offset_range");
  env.spec.handrail_length = s.at("handrail_length").get<double>();
  env.spec.handrail_radius = s.at("handrail_radius").get<double>();
  env.spec.anchor_spacing = s.at("anchor_spacing").get<double>();
  env.spec.overrun = s.at("overrun").get<double>();
  env.spec.seed = s.at("seed").get<std::uint64_t>();
  env.pair_count = j.at("pair_count").get<int>();
  for (const auto& rj : j.at("handrails")) {
    Handrail rail;
    rail.pose = pose_from_json(rj.at("pose"));
    rail.length = rj.at("length").get<double>();
    rail.radius = rj.at("radius").get<double>();
    env.handrails.push_back(rail);
  }
  for (const auto& aj : j.at("anchors")) {
    Anchor a;
    a.grasp_pose = pose_from_json(aj.at("grasp_pose"));
    a.parent_handrail = aj.at("parent_handrail").get<int>();
    a.side = aj.at("side").get<std::string>() == "left" ? Side::Left : Side::Right;
    env.anchors.push_back(a);
  }
  return env;
}

}  // namespace microgait
