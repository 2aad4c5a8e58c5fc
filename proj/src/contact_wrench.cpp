#include "microgait/contact_wrench.hpp"

#include <cmath>

#include "microgait/lp.hpp"

namespace microgait {

std::vector<Eigen::Vector3d> neighborhood26() {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(26);
  for (int x = -1; x <= 1; ++x) {
    for (int y = -1; y <= 1; ++y) {
      for (int z = -1; z <= 1; ++z) {
        if (x == 0 && y == 0 && z == 0) continue;
        dirs.push_back(Eigen::Vector3d(x, y, z).normalized());
      }
    }
  }
  return dirs;
}

std::vector<DirectionPair> ScoreConfig::default_arbitrary_directions() {
  std::vector<DirectionPair> pairs;
  for (const auto& d : neighborhood26()) pairs.push_back(DirectionPair{d, d});
  return pairs;
}

namespace {

// Edge directions of the inscribed polyhedral friction cone, scaled so the
// normal component equals the force cap.
std::vector<Eigen::Vector3d> cone_vertices(const ContactPoint& contact,
                                           const ContactModel& model) {
  std::vector<Eigen::Vector3d> verts;
  const Eigen::Vector3d n = contact.contact_frame.rotation.col(2);
  const Eigen::Vector3d t1 = contact.contact_frame.rotation.col(0);
  const Eigen::Vector3d t2 = contact.contact_frame.rotation.col(1);
  verts.push_back(Eigen::Vector3d::Zero());
  for (int k = 0; k < model.cone_facets; ++k) {
    const double th = 2.0 * M_PI * k / model.cone_facets;
    const Eigen::Vector3d edge =
        n + model.friction_coefficient * (std::cos(th) * t1 + std::sin(th) * t2);
    verts.push_back(model.normal_force_cap * edge);
  }
  return verts;
}

std::vector<Eigen::Vector3d> ball_vertices(const ContactModel& model) {
  std::vector<Eigen::Vector3d> verts;
  for (const auto& d : neighborhood26()) verts.push_back(model.grasp_force_radius * d);
  return verts;
}

double cone_support(const ContactPoint& contact, const ContactModel& model,
                    const Eigen::Vector3d& u) {
  double best = 0.0;
  for (const auto& v : cone_vertices(contact, model)) best = std::max(best, v.dot(u));
  return best;
}

}  // namespace

double contact_force_support(const ContactPoint& contact, const ContactModel& model,
                             const Eigen::Vector3d& direction) {
  const double cone = cone_support(contact, model, direction);
  const double ball = model.grasp_force_radius;
  return model.combine == GraspCombineMode::MinkowskiSum ? cone + ball : std::max(cone, ball);
}

NetSupport net_support(const ContactSet& set, const Eigen::Vector3d& force_direction,
                       const Eigen::Vector3d& torque_direction,
                       const Eigen::Vector3d& reference) {
  NetSupport out;
  if (set.empty()) {
    out.empty_set = true;
    return out;
  }
  for (const auto& c : set.contacts) {
    out.force += contact_force_support(c, set.model, force_direction);
    // sup over f of (p x f) . u == sup of f . (u x p).
    const Eigen::Vector3d arm = torque_direction.cross(c.position - reference);
    const double arm_norm = arm.norm();
    if (arm_norm > 1e-15) {
      out.torque += contact_force_support(c, set.model, arm / arm_norm) * arm_norm;
    }
    out.torque += set.model.grasp_torque_radius;  // exact ball support
  }
  return out;
}

std::vector<std::vector<Eigen::Vector3d>> contact_force_generators(const ContactPoint& contact,
                                                                   const ContactModel& model) {
  if (model.combine == GraspCombineMode::MinkowskiSum) {
    return {cone_vertices(contact, model), ball_vertices(model)};
  }
  auto verts = cone_vertices(contact, model);
  const auto ball = ball_vertices(model);
  verts.insert(verts.end(), ball.begin(), ball.end());
  return {verts};
}

std::vector<Eigen::Vector3d> contact_torque_generators(const ContactModel& model) {
  std::vector<Eigen::Vector3d> verts;
  if (model.grasp_torque_radius <= 0.0) return verts;
  for (const auto& d : neighborhood26()) verts.push_back(model.grasp_torque_radius * d);
  return verts;
}

MembershipResult wrench_membership(const ContactSet& set, const Wrench& required) {
  MembershipResult out;
  const double wrench_norm = required.force.norm() + required.torque.norm();
  if (set.empty()) {
    out.empty_set = true;
    out.feasible = wrench_norm < 1e-12;
    out.margin = out.feasible ? kInfiniteMargin : 0.0;
    return out;
  }
  if (wrench_norm < 1e-12) {
    out.feasible = true;
    out.margin = kInfiniteMargin;
    return out;
  }

  // Variables: lambda, then convex weights for every generator group.
  // maximize lambda  s.t.  sum_i G_i w_i - lambda * required = 0 (6 rows),
  // per-group sum(w) <= 1, all vars >= 0, lambda <= cap.
  struct Group {
    int offset;
    int count;
  };
  std::vector<Group> groups;
  std::vector<Eigen::Matrix<double, 6, 1>> columns;
  const Eigen::Vector3d ref = required.reference_point;
  for (const auto& c : set.contacts) {
    for (const auto& verts : contact_force_generators(c, set.model)) {
      groups.push_back({static_cast<int>(columns.size()) + 1, static_cast<int>(verts.size())});
      for (const auto& v : verts) {
        Eigen::Matrix<double, 6, 1> col;
        col.head<3>() = v;
        col.tail<3>() = (c.position - ref).cross(v);
        columns.push_back(col);
      }
    }
    const auto torque_verts = contact_torque_generators(set.model);
    if (!torque_verts.empty()) {
      groups.push_back(
          {static_cast<int>(columns.size()) + 1, static_cast<int>(torque_verts.size())});
      for (const auto& v : torque_verts) {
        Eigen::Matrix<double, 6, 1> col;
        col.head<3>().setZero();
        col.tail<3>() = v;
        columns.push_back(col);
      }
    }
  }

  const int n = 1 + static_cast<int>(columns.size());
  Eigen::VectorXd c_obj = Eigen::VectorXd::Zero(n);
  c_obj(0) = 1.0;

  // Normalized wrench direction keeps the lambda column comparable to the
  // generator columns regardless of the query's magnitude.
  Eigen::MatrixXd A_eq = Eigen::MatrixXd::Zero(6, n);
  Eigen::VectorXd b_eq = Eigen::VectorXd::Zero(6);
  A_eq.block<3, 1>(0, 0) = -required.force / wrench_norm;
  A_eq.block<3, 1>(3, 0) = -required.torque / wrench_norm;
  for (size_t j = 0; j < columns.size(); ++j) A_eq.col(1 + j) = columns[j];

  // No explicit cap on lambda: the generator set is compact, so lambda is
  // bounded for every nonzero query (the zero wrench is handled above).
  const int n_groups = static_cast<int>(groups.size());
  Eigen::MatrixXd A_ub = Eigen::MatrixXd::Zero(n_groups, n);
  Eigen::VectorXd b_ub = Eigen::VectorXd::Ones(n_groups);
  for (int g = 0; g < n_groups; ++g) {
    for (int j = 0; j < groups[g].count; ++j) A_ub(g, groups[g].offset + j) = 1.0;
  }

  const LpResult lp = solve_lp(c_obj, A_eq, b_eq, A_ub, b_ub);
  if (lp.status != LpStatus::Optimal) {
    out.feasible = false;
    out.margin = 0.0;
    return out;
  }
  out.margin = std::min(lp.x(0) / wrench_norm, kInfiniteMargin);
  out.feasible = out.margin >= 1.0 - 1e-9;
  return out;
}

namespace {

double subscore(const ContactSet& set, const std::vector<DirectionPair>& dirs,
                double delta_x, double delta_theta, const Eigen::Vector3d& reference) {
  double min_force = std::numeric_limits<double>::infinity();
  double min_torque = std::numeric_limits<double>::infinity();
  for (const auto& d : dirs) {
    const NetSupport s = net_support(set, d.force_dir, d.torque_dir, reference);
    min_force = std::min(min_force, s.force);
    min_torque = std::min(min_torque, s.torque);
  }
  return min_force * delta_x + min_torque * delta_theta;
}

}  // namespace

ContactScore contact_config_score(const ContactSet& set, const ScoreConfig& cfg,
                                  const std::vector<DirectionPair>& swing_dirs,
                                  const std::vector<DirectionPair>& base_dirs,
                                  const Eigen::Vector3d& reference) {
  ContactScore out;
  if (set.empty()) return out;
  const auto& arb = cfg.arbitrary_directions;
  out.arbitrary = subscore(set, arb, cfg.delta_x, cfg.delta_theta, reference);
  out.swing = subscore(set, swing_dirs.empty() ? arb : swing_dirs, cfg.delta_x, cfg.delta_theta,
                       reference);
  out.base = subscore(set, base_dirs.empty() ? arb : base_dirs, cfg.delta_x, cfg.delta_theta,
                      reference);
  out.total = cfg.w_arbitrary * out.arbitrary + cfg.w_swing * out.swing + cfg.w_base * out.base;
  return out;
}

}  // namespace microgait
