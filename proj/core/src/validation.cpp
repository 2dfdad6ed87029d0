#include "seqgrasp/validation.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/lp.hpp"

namespace seqgrasp {

const std::array<Vec3, 6> kGravityDirections = {
    Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::kNone: return "none";
    case FailureReason::kNoContacts: return "no_contacts";
    case FailureReason::kWrenchInfeasible: return "wrench_infeasible";
    case FailureReason::kApproachCollision: return "approach_collision";
  }
  return "none";
}

FailureReason failure_reason_from_string(const std::string& s) {
  if (s == "no_contacts") return FailureReason::kNoContacts;
  if (s == "wrench_infeasible") return FailureReason::kWrenchInfeasible;
  if (s == "approach_collision") return FailureReason::kApproachCollision;
  if (s == "none") return FailureReason::kNone;
  throw ParseError("unknown failure reason '" + s + "'");
}

double object_mass(const ObjectModel& object, const ValidationConfig& config) {
  return config.density > 0 ? config.density * object.volume() : object.mass();
}

std::vector<Contact> detect_contacts(const HandModel& model, const JointVector& theta,
                                     const Pose& object_in_hand, const ObjectModel& object,
                                     double activation_distance) {
  const auto poses = model.forward_kinematics(theta);
  std::vector<Contact> contacts;
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, bool> cells;
  const double cell = 5e-3;
  for (const CollisionSphere& s : model.collision_spheres()) {
    const Vec3 center = poses[s.link].apply(s.center);
    const SdfEval ev = sdf_world(object, object_in_hand, center);
    if (ev.value - s.radius > activation_distance) continue;
    const Vec3 p = center - s.radius * ev.gradient;  // sphere surface point
    const auto key = std::make_tuple(static_cast<std::int64_t>(std::floor(p.x() / cell)),
                                     static_cast<std::int64_t>(std::floor(p.y() / cell)),
                                     static_cast<std::int64_t>(std::floor(p.z() / cell)));
    if (cells.emplace(key, true).second) {
      contacts.push_back({p, -ev.gradient});
    }
  }
  return contacts;
}

namespace {

/// Edge directions of the m-facet inner linearization of the friction cone
/// about the (unit, object-inward) contact normal. Normal component is 1.
std::vector<Vec3> cone_edges(const Vec3& normal, double friction, int facets) {
  Vec3 ref = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = normal.cross(ref).normalized();
  const Vec3 t2 = normal.cross(t1);
  std::vector<Vec3> edges;
  edges.reserve(facets);
  for (int k = 0; k < facets; ++k) {
    const double a = 2.0 * M_PI * k / facets;
    edges.push_back(normal + friction * (std::cos(a) * t1 + std::sin(a) * t2));
  }
  return edges;
}

struct ConeSystem {
  Eigen::MatrixXd wrench_cols;  // 6 x (n * m)
  int n_contacts = 0;
  int facets = 0;
  double f_max = 0.0;
};

ConeSystem build_cone_system(const std::vector<Contact>& contacts, const Vec3& torque_origin,
                             const ValidationConfig& config) {
  ConeSystem sys;
  sys.n_contacts = static_cast<int>(contacts.size());
  sys.facets = config.cone_facets;
  sys.f_max = 10.0 * config.squeeze_preload;
  sys.wrench_cols.resize(6, sys.n_contacts * sys.facets);
  for (int i = 0; i < sys.n_contacts; ++i) {
    const auto edges = cone_edges(contacts[i].normal, config.friction, sys.facets);
    for (int k = 0; k < sys.facets; ++k) {
      const Vec3& e = edges[k];
      sys.wrench_cols.block<3, 1>(0, i * sys.facets + k) = e;
      sys.wrench_cols.block<3, 1>(3, i * sys.facets + k) =
          (contacts[i].point - torque_origin).cross(e);
    }
  }
  return sys;
}

/// Equality system for  sum_k lambda W = target (+ eps * probe),
/// per-contact normal-force caps via slack rows. Columns are laid out as
/// [lambda (n*m), slack (n), eps (optional)].
void assemble(const ConeSystem& sys, const Vec6& target, const Vec3* /*unused*/, bool with_eps,
              const Vec6& probe, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
  const int nm = sys.n_contacts * sys.facets;
  const int cols = nm + sys.n_contacts + (with_eps ? 1 : 0);
  a = Eigen::MatrixXd::Zero(6 + sys.n_contacts, cols);
  b = Eigen::VectorXd::Zero(6 + sys.n_contacts);
  a.block(0, 0, 6, nm) = sys.wrench_cols;
  b.head<6>() = target;
  if (with_eps) a.block<6, 1>(0, nm + sys.n_contacts) = -probe;
  for (int i = 0; i < sys.n_contacts; ++i) {
    // Sum of edge weights equals the normal force (edges have unit normal
    // component), capped at f_max.
    a.block(6 + i, i * sys.facets, 1, sys.facets).setOnes();
    a(6 + i, nm + i) = 1.0;
    b(6 + i) = sys.f_max;
  }
}

/// Probe wrench directions discretizing the disturbance ball: signed force
/// and torque axes.
std::array<Vec6, 12> probe_directions() {
  std::array<Vec6, 12> dirs;
  for (int i = 0; i < 6; ++i) {
    dirs[2 * i] = Vec6::Zero();
    dirs[2 * i][i] = 1.0;
    dirs[2 * i + 1] = Vec6::Zero();
    dirs[2 * i + 1][i] = -1.0;
  }
  return dirs;
}

}  // namespace

WrenchCheck wrench_resistible(const std::vector<Contact>& contacts, double mass,
                              const Vec3& gravity_dir, const Vec3& torque_origin,
                              const ValidationConfig& config) {
  const double weight = mass * config.gravity;
  if (contacts.empty()) {
    // The realizable wrench set collapses to {0}; report its L1 distance.
    return {false, -weight * gravity_dir.cwiseAbs().sum()};
  }
  if (config.friction <= 0) {
    throw std::invalid_argument("wrench_resistible: friction must be > 0");
  }
  if (config.cone_facets < 3) {
    throw std::invalid_argument("wrench_resistible: need at least 3 cone facets");
  }

  const ConeSystem sys = build_cone_system(contacts, torque_origin, config);
  Vec6 target = Vec6::Zero();
  target.head<3>() = -weight * gravity_dir;  // contacts must supply -gravity wrench

  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  assemble(sys, target, nullptr, false, Vec6::Zero(), a, b);
  const auto base = lp::solve(a, b, Eigen::VectorXd::Zero(a.cols()));
  if (base.status == lp::Status::kInfeasible) {
    return {false, -base.phase1_objective};
  }

  // Feasible: margin is the largest ball of probe disturbances still covered.
  double margin = std::numeric_limits<double>::infinity();
  for (const Vec6& u : probe_directions()) {
    assemble(sys, target, nullptr, true, u, a, b);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(a.cols());
    c[a.cols() - 1] = -1.0;  // maximize eps
    const auto r = lp::solve(a, b, c);
    const double eps = r.status == lp::Status::kOptimal ? r.x[a.cols() - 1] : 0.0;
    margin = std::min(margin, eps);
  }
  return {margin >= 0.0, margin};
}

RotationRobustness rotation_robustness(const HandModel& model, const JointVector& theta,
                                       const Pose& object_in_hand, const ObjectModel& object,
                                       const ValidationConfig& config) {
  RotationRobustness out;
  const auto contacts =
      detect_contacts(model, theta, object_in_hand, object, config.activation_distance);
  const double mass = object_mass(object, config);
  out.robust = true;
  for (int i = 0; i < 6; ++i) {
    const WrenchCheck check = wrench_resistible(contacts, mass, kGravityDirections[i],
                                                object_in_hand.translation, config);
    out.margins[i] = check.margin;
    if (!check.feasible) {
      out.robust = false;
      if (out.first_infeasible < 0) out.first_infeasible = i;
    }
  }
  if (contacts.empty()) out.first_infeasible = -2;  // signals no_contacts
  return out;
}

namespace {

/// No sphere may penetrate the table, and none may penetrate the grasp
/// object deeper than `object_allowance`. Obstacles allow no penetration.
bool pose_collision_free(const HandModel& model, const std::vector<Pose>& link_poses,
                         const Pose& hand_world, const ObjectModel& object,
                         const Pose& object_world, double object_allowance,
                         const std::vector<PlacedObject>& obstacles) {
  constexpr double kTol = 1e-9;
  for (const CollisionSphere& s : model.collision_spheres()) {
    const Vec3 c = hand_world.compose(link_poses[s.link]).apply(s.center);
    if (s.radius - table_sdf(c) > kTol) return false;
    if (s.radius - sdf_world(object, object_world, c).value > object_allowance + kTol) {
      return false;
    }
    for (const PlacedObject& obs : obstacles) {
      if (s.radius - sdf_world(*obs.object, obs.world_pose, c).value > kTol) return false;
    }
  }
  return true;
}

}  // namespace

bool execution_feasibility(const HandModel& model, const JointVector& theta,
                           const Pose& object_in_hand, const ObjectModel& object,
                           const ValidationConfig& config,
                           const std::vector<PlacedObject>& obstacles) {
  const Pose object_world = object.canonical_pose;
  const Pose grasp_pose = object_world.compose(object_in_hand.inverse());
  const Vec3 approach = grasp_pose.rotation * model.approach_axis();
  Pose pre = grasp_pose;
  pre.translation -= 0.10 * approach;

  const auto link_poses = model.forward_kinematics(theta);

  // (a) the offset pose itself must be fully collision-free.
  if (!pose_collision_free(model, link_poses, pre, object, object_world, 0.0, obstacles)) {
    return false;
  }
  // (b) swept straight-line approach at 1 cm resolution; penetration into the
  // grasp object is allowed up to the activation distance (final pose touches).
  const double dist = (grasp_pose.translation - pre.translation).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(dist / 0.01)));
  for (int i = 1; i <= steps; ++i) {
    Pose x = pre;
    x.translation = pre.translation +
                    (grasp_pose.translation - pre.translation) * (static_cast<double>(i) / steps);
    if (!pose_collision_free(model, link_poses, x, object, object_world,
                             config.activation_distance, obstacles)) {
      return false;
    }
  }
  return true;
}

ValidationReport validate(const HandModel& model, const JointVector& theta,
                          const Pose& object_in_hand, const ObjectModel& object,
                          const ValidationConfig& config) {
  ValidationReport report;
  const RotationRobustness rot = rotation_robustness(model, theta, object_in_hand, object, config);
  report.rotation_robust = rot.robust;
  report.margins = rot.margins;
  report.execution_feasible = execution_feasibility(model, theta, object_in_hand, object, config);

  if (rot.first_infeasible == -2) {
    report.failure = FailureReason::kNoContacts;
  } else if (!rot.robust) {
    report.failure = FailureReason::kWrenchInfeasible;
    report.infeasible_direction = rot.first_infeasible;
  } else if (!report.execution_feasible) {
    report.failure = FailureReason::kApproachCollision;
  }
  return report;
}

}  // namespace seqgrasp
