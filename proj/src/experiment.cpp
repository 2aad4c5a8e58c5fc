#include "microgait/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"

#include "microgait/trajectory.hpp"

namespace microgait {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config serialization

namespace {

SwingOrderMode swing_order_mode_from_name(const std::string& s) {
  if (s == "opt") return SwingOrderMode::Opt;
  if (s == "amble") return SwingOrderMode::Amble;
  if (s == "trot") return SwingOrderMode::Trot;
  if (s == "fixed") return SwingOrderMode::Fixed;
  throw std::runtime_error("unknown swing order mode: " + s);
}

OverlapMode overlap_mode_from_name(const std::string& s) {
  if (s == "fraction") return OverlapMode::Fraction;
  if (s == "opt") return OverlapMode::Opt;
  if (s == "none") return OverlapMode::None;
  if (s == "full_pair") return OverlapMode::FullPair;
  throw std::runtime_error("unknown overlap mode: " + s);
}

json gait_params_to_json(const GaitParams& p) {
  return json{{"swing_order_mode", swing_order_mode_name(p.swing_order_mode)},
              {"fixed_order", p.fixed_order},
              {"overlap_mode", overlap_mode_name(p.overlap_mode)},
              {"overlap_fraction", p.overlap_fraction},
              {"stride_length", p.stride_length},
              {"base_speed_max", p.base_speed_max},
              {"swing_speed_max", p.swing_speed_max},
              {"nominal_base_height", p.nominal_base_height},
              {"ee_clearance", p.ee_clearance},
              {"gripper_release_duration", p.gripper_release_duration},
              {"gripper_grasp_duration", p.gripper_grasp_duration},
              {"max_overlap_fraction", p.max_overlap_fraction}};
}

GaitParams gait_params_from_json(const json& j) {
  GaitParams p;
  p.swing_order_mode = swing_order_mode_from_name(j.value("swing_order_mode", "opt"));
  if (j.contains("fixed_order")) {
    for (int i = 0; i < 4; ++i) p.fixed_order[i] = j["fixed_order"][i].get<int>();
  }
  p.overlap_mode = overlap_mode_from_name(j.value("overlap_mode", "fraction"));
  p.overlap_fraction = j.value("overlap_fraction", p.overlap_fraction);
  p.stride_length = j.value("stride_length", p.stride_length);
  p.base_speed_max = j.value("base_speed_max", p.base_speed_max);
  p.swing_speed_max = j.value("swing_speed_max", p.swing_speed_max);
  p.nominal_base_height = j.value("nominal_base_height", p.nominal_base_height);
  p.ee_clearance = j.value("ee_clearance", p.ee_clearance);
  p.gripper_release_duration = j.value("gripper_release_duration", p.gripper_release_duration);
  p.gripper_grasp_duration = j.value("gripper_grasp_duration", p.gripper_grasp_duration);
  p.max_overlap_fraction = j.value("max_overlap_fraction", p.max_overlap_fraction);
  return p;
}

json env_spec_to_json(const EnvironmentSpec& s) {
  auto range = [](const Range& r) { return json{r.lo, r.hi}; };
  return json{{"target_distance", s.target_distance},
              {"x_offset_range", range(s.x_offset_range)},
              {"y_offset_range", range(s.y_offset_range)},
              {"z_offset_range", range(s.z_offset_range)},
              {"max_rotation", s.max_rotation},
              {"pair_y_separation_range", range(s.pair_y_separation_range)},
              {"pair_xz_offset_range", range(s.pair_xz_offset_range)},
              {"handrail_length", s.handrail_length},
              {"handrail_radius", s.handrail_radius},
              {"anchor_spacing", s.anchor_spacing},
              {"overrun", s.overrun}};
}

EnvironmentSpec env_spec_from_json(const json& j) {
  EnvironmentSpec s;
  auto range = [&j](const char* key, Range fallback) {
    if (!j.contains(key)) return fallback;
    return Range{j[key][0].get<double>(), j[key][1].get<double>()};
  };
  s.target_distance = j.value("target_distance", s.target_distance);
  s.x_offset_range = range("x_offset_range", s.x_offset_range);
  s.y_offset_range = range("y_offset_range", s.y_offset_range);
  s.z_offset_range = range("z_offset_range", s.z_offset_range);
  s.max_rotation = j.value("max_rotation", s.max_rotation);
  s.pair_y_separation_range = range("pair_y_separation_range", s.pair_y_separation_range);
  s.pair_xz_offset_range = range("pair_xz_offset_range", s.pair_xz_offset_range);
  s.handrail_length = j.value("handrail_length", s.handrail_length);
  s.handrail_radius = j.value("handrail_radius", s.handrail_radius);
  s.anchor_spacing = j.value("anchor_spacing", s.anchor_spacing);
  s.overrun = j.value("overrun", s.overrun);
  return s;
}

}  // namespace

std::vector<Variant> default_variants() {
  return {
      {"amble", "swing_order_mode", "amble"},
      {"trot", "swing_order_mode", "trot"},
      {"overlap_opt", "overlap_mode", "opt"},
      {"overlap_50", "overlap_fraction", "0.5"},
      {"stride_0.3", "stride_length", "0.3"},
      {"speed_0.10", "base_speed_max", "0.10"},
      {"height_0.6", "nominal_base_height", "0.6"},
  };
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.variants = default_variants();
  return cfg;
}

GaitParams apply_variant(const GaitParams& baseline, const Variant& variant) {
  GaitParams p = baseline;
  const std::string& key = variant.parameter;
  if (key == "swing_order_mode") {
    p.swing_order_mode = swing_order_mode_from_name(variant.value);
  } else if (key == "overlap_mode") {
    p.overlap_mode = overlap_mode_from_name(variant.value);
  } else {
    const double v = std::stod(variant.value);
    if (key == "overlap_fraction") p.overlap_fraction = v;
    else if (key == "stride_length") p.stride_length = v;
    else if (key == "base_speed_max") p.base_speed_max = v;
    else if (key == "swing_speed_max") p.swing_speed_max = v;
    else if (key == "nominal_base_height") p.nominal_base_height = v;
    else if (key == "ee_clearance") p.ee_clearance = v;
    else throw std::runtime_error("unknown variant parameter: " + key);
  }
  return p;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["environment"] = env_spec_to_json(cfg.environment);
  j["morphologies"] = json::array();
  for (Morphology m : cfg.morphologies) j["morphologies"].push_back(morphology_name(m));
  j["baseline"] = gait_params_to_json(cfg.baseline);
  j["variants"] = json::array();
  for (const auto& v : cfg.variants) {
    j["variants"].push_back({{"name", v.name}, {"parameter", v.parameter}, {"value", v.value}});
  }
  j["trial_count"] = cfg.trial_count;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["playback_rate"] = cfg.playback_rate;
  j["monitor_enabled"] = cfg.monitor_enabled;
  j["target_distance"] = cfg.target_distance;
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  cfg.schema_version = j.value("schema_version", kConfigSchemaVersion);
  if (cfg.schema_version > kConfigSchemaVersion) {
    throw std::runtime_error("config schema version newer than supported");
  }
  if (j.contains("environment")) cfg.environment = env_spec_from_json(j["environment"]);
  if (j.contains("morphologies")) {
    cfg.morphologies.clear();
    for (const auto& m : j["morphologies"]) {
      cfg.morphologies.push_back(morphology_from_name(m.get<std::string>()));
    }
  }
  if (j.contains("baseline")) cfg.baseline = gait_params_from_json(j["baseline"]);
  if (j.contains("variants")) {
    cfg.variants.clear();
    for (const auto& v : j["variants"]) {
      cfg.variants.push_back(Variant{v.at("name").get<std::string>(),
                                     v.at("parameter").get<std::string>(),
                                     v.at("value").get<std::string>()});
    }
  } else {
    cfg.variants = default_variants();
  }
  cfg.trial_count = j.value("trial_count", cfg.trial_count);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.playback_rate = j.value("playback_rate", cfg.playback_rate);
  cfg.monitor_enabled = j.value("monitor_enabled", cfg.monitor_enabled);
  cfg.target_distance = j.value("target_distance", cfg.target_distance);
  return cfg;
}

std::string condition_hash(const ExperimentConfig& cfg, const std::string& condition,
                           Morphology morphology) {
  ExperimentConfig canon = cfg;
  canon.output_dir.clear();
  std::string text = experiment_config_to_json(canon);
  text += "|" + condition + "|" + morphology_name(morphology);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Trial execution

namespace {

// Contact set of the attached limbs in the base frame at particular world
// poses; torque reference is the base origin.
ContactSet make_contact_set(const Pose& base_pose, const std::array<Pose, 4>& contact_world,
                            const std::array<bool, 4>& attached, const ContactModel& model) {
  ContactSet set;
  set.model = model;
  const Pose base_inv = base_pose.inverse();
  for (int limb = 0; limb < 4; ++limb) {
    if (!attached[limb]) continue;
    ContactPoint cp;
    cp.limb_index = limb;
    cp.contact_frame = base_inv * contact_world[limb];
    cp.position = cp.contact_frame.translation;
    set.contacts.push_back(cp);
  }
  return set;
}

// Support intervals of one stride under a candidate schedule: attachments
// change only at swing starts/ends.
std::vector<ScoredInterval> schedule_intervals(const SwingSchedule& sched, const Pose& base_start,
                                               const Pose& base_goal,
                                               const std::array<Pose, 4>& current,
                                               const std::array<Pose, 4>& target,
                                               const ContactModel& model) {
  std::vector<double> cuts{0.0, sched.stride_duration};
  for (int limb = 0; limb < 4; ++limb) {
    cuts.push_back(sched.start_time[limb]);
    cuts.push_back(sched.end_time[limb]);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-9; }),
             cuts.end());

  std::vector<ScoredInterval> out;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t0 = cuts[k];
    const double t1 = cuts[k + 1];
    if (t1 - t0 < 1e-9) continue;
    const double mid = 0.5 * (t0 + t1);
    std::array<bool, 4> attached;
    std::array<Pose, 4> world;
    for (int limb = 0; limb < 4; ++limb) {
      attached[limb] = !(mid > sched.start_time[limb] && mid < sched.end_time[limb]);
      world[limb] = mid < sched.start_time[limb] ? current[limb] : target[limb];
    }
    const Pose base = interpolate_pose(base_start, base_goal, mid / sched.stride_duration);
    ScoredInterval iv;
    iv.contacts = make_contact_set(base, world, attached, model);
    iv.duration = t1 - t0;
    out.push_back(iv);
  }
  return out;
}

// All 24 swing orders ranked best-first by (min interval score,
// duration-weighted mean, lexicographic order).
std::vector<std::array<int, 4>> ranked_orders(const ContactSequenceFn& sequence_fn,
                                              const ScoreFn& score_fn) {
  struct Entry {
    std::array<int, 4> order;
    double min_score;
    double mean;
  };
  std::vector<Entry> entries;
  std::array<int, 4> perm{0, 1, 2, 3};
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
    entries.push_back(Entry{perm, min_score, total > 0.0 ? weighted / total : 0.0});
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (std::abs(a.min_score - b.min_score) > 1e-12) return a.min_score > b.min_score;
    if (std::abs(a.mean - b.mean) > 1e-12) return a.mean > b.mean;
    return a.order < b.order;
  });
  std::vector<std::array<int, 4>> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.order);
  return out;
}

std::array<double, 4> swing_path_lengths(const std::array<Pose, 4>& current,
                                         const std::array<Pose, 4>& target, double clearance) {
  std::array<double, 4> d{};
  for (int limb = 0; limb < 4; ++limb) {
    d[limb] = SwingPath(current[limb], target[limb], clearance).total_length();
  }
  return d;
}

// Initial stance: one anchor per limb near the start of the corridor, hind
// limbs nearest x = 0 and front limbs about a body length ahead.
std::array<int, 4> initial_anchor_selection(const Environment& env) {
  std::array<int, 4> chosen{-1, -1, -1, -1};
  auto pick = [&env, &chosen](Side side, double want_x, int limb) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(env.anchors.size()); ++i) {
      if (env.anchors[i].side != side) continue;
      bool used = false;
      for (int l = 0; l < 4; ++l) used = used || chosen[l] == i;
      if (used) continue;
      const double cost = std::abs(env.anchors[i].grasp_pose.translation.x() - want_x);
      if (cost < best) {
        best = cost;
        chosen[limb] = i;
      }
    }
  };
  pick(Side::Left, 0.0, 2);   // LH
  pick(Side::Right, 0.0, 3);  // RH
  pick(Side::Left, 0.7, 0);   // LF
  pick(Side::Right, 0.7, 1);  // RF
  return chosen;
}

// IK with a small family of elbow seeds; used only for the initial stance.
bool solve_initial_limb(const RobotModel& model, int limb, const Pose& target_base_frame,
                        Vector6* q_out) {
  const std::array<Vector6, 4> seeds = {
      (Vector6() << 0.0, -0.5, 1.0, 0.0, -0.5, 0.0).finished(),
      (Vector6() << 0.0, 0.5, -1.0, 0.0, 0.5, 0.0).finished(),
      (Vector6() << 0.0, -1.0, 1.8, 0.0, -0.8, 0.0).finished(),
      (Vector6() << 0.0, 1.0, -1.8, 0.0, 0.8, 0.0).finished(),
  };
  for (const auto& seed : seeds) {
    const IkResult r = inverse_kinematics(model, limb, target_base_frame, seed);
    if (r.ok()) {
      *q_out = r.q;
      return true;
    }
  }
  return false;
}

}  // namespace

TrialResult run_trial(const Environment& env, const RobotModel& model, const GaitParams& params,
                      const TrialOptions& options) {
  TrialResult out;
  MetricsAccumulator acc;

  ExecutionConfig exec;
  exec.rate = options.rate;
  exec.monitor = options.monitor;
  exec.contact_model = options.contact_model;
  exec.score_config = options.score_config;
  exec.monitor_enabled = options.monitor_enabled;

  // Initial stance and base pose.
  const std::array<int, 4> initial = initial_anchor_selection(env);
  for (int limb = 0; limb < 4; ++limb) {
    if (initial[limb] < 0) {
      out.metrics = acc.finalize(TrialOutcome::PlanFailure);
      out.detail = "no initial anchors";
      return out;
    }
  }
  RobotState state;
  std::array<Pose, 4> contacts;
  for (int limb = 0; limb < 4; ++limb) contacts[limb] = env.anchors[initial[limb]].grasp_pose;
  Pose up_hint;  // identity: +z up
  state.base_pose =
      target_base_pose_from_contacts(contacts, up_hint, params.nominal_base_height);
  for (int limb = 0; limb < 4; ++limb) {
    Vector6 q;
    if (!solve_initial_limb(model, limb, state.base_pose.inverse() * contacts[limb], &q)) {
      out.metrics = acc.finalize(TrialOutcome::PlanFailure);
      out.detail = "initial stance IK failure, limb " + std::to_string(limb);
      return out;
    }
    state.joints.set_limb_q(limb, q);
    state.attachment[limb] = initial[limb];
    state.contact_pose[limb] = contacts[limb];
  }

  const double start_x = state.base_pose.translation.x();
  TrialOutcome outcome = TrialOutcome::Success;

  try {
    while (state.base_pose.translation.x() - start_x < options.target_distance) {
      if (out.strides >= options.max_strides) {
        outcome = TrialOutcome::PlanFailure;
        out.detail = "stride limit reached";
        break;
      }
      std::array<Eigen::Vector3d, 4> positions;
      for (int limb = 0; limb < 4; ++limb) positions[limb] = state.contact_pose[limb].translation;
      StrideGoal goal = plan_stride_goal(env, state.base_pose, positions, model, params);

      std::array<std::vector<RankedAnchor>, 4> ranked;
      for (int limb = 0; limb < 4; ++limb) {
        const Pose mount_world = state.base_pose * model.mount_poses[limb];
        ranked[limb] = candidate_anchors(env, mount_world, positions[limb], params.stride_length,
                                         model.limbs[limb].reach(), limb_side(limb));
      }

      const std::array<Pose, 4> current = state.contact_pose;
      auto sequence_for_goal = [&](const StrideGoal& g) {
        return [&, g](const std::array<int, 4>& order) {
          const auto dists = swing_path_lengths(current, g.target_contact_pose,
                                                params.ee_clearance);
          const double disp =
              (g.target_base_pose.translation - state.base_pose.translation).norm();
          const SwingSchedule sched = build_schedule(params, order, dists, disp);
          return schedule_intervals(sched, state.base_pose, g.target_base_pose, current,
                                    g.target_contact_pose, options.contact_model);
        };
      };
      auto score_fn = [&](const ContactSet& set) {
        return contact_config_score(set, options.score_config, {}, {}).total;
      };

      std::vector<std::array<int, 4>> orders;
      switch (params.swing_order_mode) {
        case SwingOrderMode::Opt:
          orders = ranked_orders(sequence_for_goal(goal), score_fn);
          break;
        case SwingOrderMode::Amble:
          orders = {amble_order()};
          break;
        case SwingOrderMode::Trot:
          orders = {trot_order()};
          break;
        case SwingOrderMode::Fixed:
          orders = {params.fixed_order};
          break;
      }

      PlanModifier modifier(env, model, params, state.base_pose, goal, ranked, orders);
      std::array<int, 4> order = orders.front();
      bool stride_done = false;
      while (!stride_done) {
        const auto dists =
            swing_path_lengths(current, goal.target_contact_pose, params.ee_clearance);
        const double disp =
            (goal.target_base_pose.translation - state.base_pose.translation).norm();
        const SwingSchedule sched = build_schedule(params, order, dists, disp);
        const StrideTrajectory traj =
            build_stride_trajectory(state.base_pose, goal.target_base_pose, current,
                                    goal.target_contact_pose, sched, params);
        const CoordinationResult coord =
            coordinate_stride(model, goal, traj, state, options.rate);
        if (!coord.ok) {
          const auto next = modifier.next(coord.failure.info);
          if (!next) {
            throw MotionPlanningFailure("plan modification exhausted: " + coord.failure.detail);
          }
          goal = next->first;
          order = next->second;
          continue;
        }

        const ExecutionTrace trace = execute_stride(model, coord, traj, state, exec);
        if (options.stride_trace_sink) options.stride_trace_sink(trace);
        acc.add_trace(model, trace);
        for (const auto& iv : schedule_intervals(sched, state.base_pose, goal.target_base_pose,
                                                 current, goal.target_contact_pose,
                                                 options.contact_model)) {
          acc.add_score_interval(ScoreInterval{iv.duration, score_fn(iv.contacts)});
        }
        state = state_after(model, trace, state, traj);
        // Rewrap joints into (-pi, pi] between strides: warm-started IK can
        // wind revolute joints toward the +-2pi limits over many strides,
        // and the wrap leaves every limb pose unchanged.
        for (int l = 0; l < 4; ++l) {
          Vector6 ql = state.joints.limb_q(l);
          for (int j = 0; j < 6; ++j) ql(j) = std::remainder(ql(j), 2.0 * M_PI);
          state.joints.set_limb_q(l, ql);
        }
        ++out.strides;
        if (trace.paused) {
          outcome = TrialOutcome::Instability;
          out.detail = trace.pause_cause;
        }
        stride_done = true;
      }
      if (outcome != TrialOutcome::Success) break;
    }
  } catch (const NoCandidates& e) {
    outcome = TrialOutcome::PlanFailure;
    out.detail = std::string(e.what()) + " " + std::to_string(e.limb);
  } catch (const InfeasibleSchedule& e) {
    outcome = TrialOutcome::PlanFailure;
    out.detail = e.what();
  } catch (const MotionPlanningFailure& e) {
    outcome = TrialOutcome::PlanFailure;
    out.detail = e.what();
  }

  out.distance = state.base_pose.translation.x() - start_x;
  out.metrics = acc.finalize(outcome);
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

std::string trial_file_name(const std::string& condition, Morphology morph, int env_index) {
  std::ostringstream s;
  s << condition << "__" << morphology_name(morph) << "__env" << env_index << ".json";
  return s.str();
}

json metrics_to_json(const TrialMetrics& m) {
  auto ws = [](const WrenchStats& w) {
    return json{{"force_peak", w.force_peak},
                {"force_rms", w.force_rms},
                {"torque_peak", w.torque_peak},
                {"torque_rms", w.torque_rms}};
  };
  return json{{"outcome", trial_outcome_name(m.outcome)},
              {"normalized_contact_score", m.normalized_contact_score},
              {"whole_body_wrench", ws(m.whole_body_wrench)},
              {"swing_wrench", ws(m.swing_wrench)},
              {"mechanical_work", m.mechanical_work},
              {"rms_joint_torque", m.rms_joint_torque},
              {"rms_joint_velocity", m.rms_joint_velocity},
              {"traversal_time", m.traversal_time}};
}

TrialMetrics metrics_from_json(const json& j) {
  TrialMetrics m;
  auto ws = [](const json& w) {
    WrenchStats s;
    s.force_peak = w.at("force_peak").get<double>();
    s.force_rms = w.at("force_rms").get<double>();
    s.torque_peak = w.at("torque_peak").get<double>();
    s.torque_rms = w.at("torque_rms").get<double>();
    return s;
  };
  const std::string outcome = j.at("outcome").get<std::string>();
  if (outcome == "success") m.outcome = TrialOutcome::Success;
  else if (outcome == "plan_failure") m.outcome = TrialOutcome::PlanFailure;
  else m.outcome = TrialOutcome::Instability;
  m.normalized_contact_score = j.at("normalized_contact_score").get<double>();
  m.whole_body_wrench = ws(j.at("whole_body_wrench"));
  m.swing_wrench = ws(j.at("swing_wrench"));
  m.mechanical_work = j.at("mechanical_work").get<double>();
  m.rms_joint_torque = j.at("rms_joint_torque").get<double>();
  m.rms_joint_velocity = j.at("rms_joint_velocity").get<double>();
  m.traversal_time = j.at("traversal_time").get<double>();
  return m;
}

SweepResult run_sweep_impl(const ExperimentConfig& cfg, bool parallel) {
  struct Condition {
    std::string label;
    Morphology morph;
    GaitParams params;
    std::string hash;
  };
  std::vector<Condition> conds;
  for (Morphology m : cfg.morphologies) {
    conds.push_back({"baseline", m, cfg.baseline, condition_hash(cfg, "baseline", m)});
    for (const auto& v : cfg.variants) {
      conds.push_back({v.name, m, apply_variant(cfg.baseline, v),
                       condition_hash(cfg, v.name, m)});
    }
  }

  const fs::path trials_dir = fs::path(cfg.output_dir) / "trials";
  fs::create_directories(trials_dir);

  const int n_tasks = static_cast<int>(conds.size()) * cfg.trial_count;
  SweepResult result;
  result.records.resize(n_tasks);

  auto run_one = [&](int task) {
    const int ci = task / cfg.trial_count;
    const int ei = task % cfg.trial_count;
    const Condition& cond = conds[ci];

    TrialRecord rec;
    rec.env_index = ei;
    rec.env_seed = cfg.seed + static_cast<std::uint64_t>(ei);
    rec.morphology = cond.morph;
    rec.condition = cond.label;
    rec.config_hash = cond.hash;

    const fs::path file = trials_dir / trial_file_name(cond.label, cond.morph, ei);
    if (fs::exists(file)) {
      std::ifstream in(file);
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        const TrialRecord cached = trial_record_from_json(buf.str());
        if (cached.config_hash == cond.hash && cached.env_seed == rec.env_seed) {
          result.records[task] = cached;
          return;
        }
      } catch (const std::exception&) {
        // Unreadable cache: recompute.
      }
    }

    EnvironmentSpec spec = cfg.environment;
    spec.seed = rec.env_seed;
    spec.target_distance = cfg.target_distance;
    const Environment env = generate_environment(spec);
    const RobotModel model = RobotModel::default_model(cond.morph);

    TrialOptions opts;
    opts.rate = cfg.playback_rate;
    opts.target_distance = cfg.target_distance;
    opts.monitor_enabled = cfg.monitor_enabled;
    rec.result = run_trial(env, model, cond.params, opts);

    std::ofstream outf(file);
    outf << trial_record_to_json(rec, true);
    result.records[task] = rec;
  };

  if (parallel) {
#ifdef _OPENMP
    if (const char* envcap = std::getenv("MICROGAIT_THREADS")) {
      const int cap = std::atoi(envcap);
      if (cap > 0) omp_set_num_threads(cap);
    }
#pragma omp parallel for schedule(dynamic)
    for (int task = 0; task < n_tasks; ++task) run_one(task);
#else
    for (int task = 0; task < n_tasks; ++task) run_one(task);
#endif
  } else {
    for (int task = 0; task < n_tasks; ++task) run_one(task);
  }
  return result;
}

}  // namespace

std::string trial_record_to_json(const TrialRecord& rec, bool with_timestamp) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["config_hash"] = rec.config_hash;
  j["env_index"] = rec.env_index;
  j["env_seed"] = rec.env_seed;
  j["morphology"] = morphology_name(rec.morphology);
  j["condition"] = rec.condition;
  j["metrics"] = metrics_to_json(rec.result.metrics);
  j["strides"] = rec.result.strides;
  j["distance"] = rec.result.distance;
  j["detail"] = rec.result.detail;
  if (with_timestamp) j["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  return j.dump(2);
}

TrialRecord trial_record_from_json(const std::string& text) {
  const json j = json::parse(text);
  TrialRecord rec;
  rec.config_hash = j.at("config_hash").get<std::string>();
  rec.env_index = j.at("env_index").get<int>();
  rec.env_seed = j.at("env_seed").get<std::uint64_t>();
  rec.morphology = morphology_from_name(j.at("morphology").get<std::string>());
  rec.condition = j.at("condition").get<std::string>();
  rec.result.metrics = metrics_from_json(j.at("metrics"));
  rec.result.strides = j.at("strides").get<int>();
  rec.result.distance = j.at("distance").get<double>();
  rec.result.detail = j.at("detail").get<std::string>();
  return rec;
}

SweepResult run_sweep(const ExperimentConfig& cfg, bool parallel) {
  return run_sweep_impl(cfg, parallel);
}

SweepResult run_sweep_serial(const ExperimentConfig& cfg) { return run_sweep_impl(cfg, false); }

std::string success_table_csv(const ExperimentConfig& cfg, const SweepResult& sweep) {
  std::vector<std::string> conditions{"baseline"};
  for (const auto& v : cfg.variants) conditions.push_back(v.name);

  std::ostringstream csv;
  csv << "condition";
  for (Morphology m : cfg.morphologies) csv << "," << morphology_name(m) << "_successes";
  csv << ",trials\n";
  for (const auto& cond : conditions) {
    csv << cond;
    for (Morphology m : cfg.morphologies) {
      int count = 0;
      for (const auto& rec : sweep.records) {
        if (rec.condition == cond && rec.morphology == m &&
            rec.result.metrics.outcome == TrialOutcome::Success) {
          ++count;
        }
      }
      csv << "," << count;
    }
    csv << "," << cfg.trial_count << "\n";
  }
  return csv.str();
}

const std::vector<MetricAccessor>& comparison_metrics() {
  static const std::vector<MetricAccessor> metrics = {
      {"traversal_time", [](const TrialMetrics& m) { return m.traversal_time; }},
      {"mechanical_work", [](const TrialMetrics& m) { return m.mechanical_work; }},
      {"wrench_force_rms", [](const TrialMetrics& m) { return m.whole_body_wrench.force_rms; }},
      {"wrench_torque_rms",
       [](const TrialMetrics& m) { return m.whole_body_wrench.torque_rms; }},
      {"swing_force_rms", [](const TrialMetrics& m) { return m.swing_wrench.force_rms; }},
      {"normalized_contact_score",
       [](const TrialMetrics& m) { return m.normalized_contact_score; }},
      {"rms_joint_torque", [](const TrialMetrics& m) { return m.rms_joint_torque; }},
      {"rms_joint_velocity", [](const TrialMetrics& m) { return m.rms_joint_velocity; }},
  };
  return metrics;
}

std::vector<PairedComparison> compare_results(const std::vector<TrialRecord>& records,
                                              const std::string& baseline_label) {
  // Collect condition labels (order of first appearance) and morphologies.
  std::vector<std::string> variants;
  std::vector<Morphology> morphs;
  for (const auto& rec : records) {
    if (rec.condition != baseline_label &&
        std::find(variants.begin(), variants.end(), rec.condition) == variants.end()) {
      variants.push_back(rec.condition);
    }
    if (std::find(morphs.begin(), morphs.end(), rec.morphology) == morphs.end()) {
      morphs.push_back(rec.morphology);
    }
  }

  auto find_record = [&](const std::string& cond, Morphology m,
                         std::uint64_t env_seed) -> const TrialRecord* {
    for (const auto& rec : records) {
      if (rec.condition == cond && rec.morphology == m && rec.env_seed == env_seed) return &rec;
    }
    return nullptr;
  };

  std::vector<PairedComparison> out;
  for (Morphology m : morphs) {
    std::vector<std::uint64_t> seeds;
    for (const auto& rec : records) {
      if (rec.morphology == m && rec.condition == baseline_label) seeds.push_back(rec.env_seed);
    }
    std::sort(seeds.begin(), seeds.end());
    for (const auto& variant : variants) {
      for (const auto& metric : comparison_metrics()) {
        PairedComparison cmp;
        cmp.variant = variant;
        cmp.morphology = m;
        cmp.metric = metric.name;
        double sum_b = 0.0;
        double sum_v = 0.0;
        for (std::uint64_t seed : seeds) {
          const TrialRecord* b = find_record(baseline_label, m, seed);
          const TrialRecord* v = find_record(variant, m, seed);
          if (!b || !v) continue;
          if (b->result.metrics.outcome != TrialOutcome::Success ||
              v->result.metrics.outcome != TrialOutcome::Success) {
            continue;
          }
          const double mb = metric.get(b->result.metrics);
          const double mv = metric.get(v->result.metrics);
          cmp.deltas.push_back(mv - mb);
          sum_b += mb;
          sum_v += mv;
        }
        cmp.n_pairs = static_cast<int>(cmp.deltas.size());
        cmp.available = cmp.n_pairs > 0;
        if (cmp.available && sum_b != 0.0) {
          cmp.percent_change = 100.0 * (sum_v - sum_b) / sum_b;
        }
        if (cmp.n_pairs >= 2) {
          std::vector<double> zeros(cmp.deltas.size(), 0.0);
          const PairedTTest tt = paired_t_test(zeros, cmp.deltas);
          cmp.t = tt.t;
          cmp.p = tt.p;
          cmp.significant = tt.p < 0.05;
        }
        out.push_back(cmp);
      }
    }
  }
  return out;
}

std::string percent_change_csv(const std::vector<PairedComparison>& comparisons) {
  std::vector<Morphology> morphs;
  std::vector<std::string> variants;
  for (const auto& c : comparisons) {
    if (std::find(morphs.begin(), morphs.end(), c.morphology) == morphs.end()) {
      morphs.push_back(c.morphology);
    }
    if (std::find(variants.begin(), variants.end(), c.variant) == variants.end()) {
      variants.push_back(c.variant);
    }
  }
  std::ostringstream csv;
  for (Morphology m : morphs) {
    csv << "morphology," << morphology_name(m) << "\nvariant";
    for (const auto& metric : comparison_metrics()) csv << "," << metric.name;
    csv << "\n";
    for (const auto& variant : variants) {
      csv << variant;
      for (const auto& metric : comparison_metrics()) {
        const PairedComparison* found = nullptr;
        for (const auto& c : comparisons) {
          if (c.morphology == m && c.variant == variant && c.metric == metric.name) found = &c;
        }
        csv << ",";
        if (!found || !found->available) {
          csv << "n/a";
        } else {
          csv << found->percent_change << "%";
          if (!found->significant) csv << " (ns)";
        }
      }
      csv << "\n";
    }
    csv << "\n";
  }
  return csv.str();
}

std::vector<TrialRecord> load_trial_records(const std::string& trials_dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(trials_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TrialRecord> out;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    out.push_back(trial_record_from_json(buf.str()));
  }
  return out;
}

}  // namespace microgait
