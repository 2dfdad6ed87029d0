#include "seqgrasp/energy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqgrasp {

Eigen::MatrixXd grasp_map(const std::vector<Vec3>& contacts, const Vec3& center) {
  if (contacts.empty()) {
    throw std::invalid_argument("grasp_map: need at least one contact");
  }
  Eigen::MatrixXd g(6, 3 * contacts.size());
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    g.block<3, 3>(0, 3 * i) = Mat3::Identity();
    g.block<3, 3>(3, 3 * i) = skew(contacts[i] - center);
  }
  return g;
}

EnergyEvaluator::EnergyEvaluator(const HandModel& model, const ObjectModel& object,
                                 EnergyWeights weights, ContactAssignment assignment)
    : model_(model), object_(object), weights_(weights), assignment_(std::move(assignment)) {
  const Pose& w = object_.canonical_pose;
  object_center_world_ = w.translation;
  object_samples_world_.reserve(object_.surface_samples.points.size());
  for (const Vec3& q : object_.surface_samples.points) {
    const Vec3 qw = w.apply(q);
    object_samples_world_.push_back(qw);
    // Object-table interpenetration is independent of the hand state.
    if (qw.z() < 0) object_sample_table_penalty_ += -qw.z();
  }
}

void EnergyEvaluator::set_assignment(ContactAssignment assignment) {
  assignment_ = std::move(assignment);
}

EnergyBreakdown EnergyEvaluator::value(const JointVector& theta, const Pose& hand_world) const {
  return eval<false>(theta, hand_world, nullptr, nullptr);
}

EnergyGradient EnergyEvaluator::value_and_gradient(const JointVector& theta,
                                                   const Pose& hand_world) const {
  EnergyGradient out;
  out.d_theta = Eigen::VectorXd::Zero(model_.dof());
  out.d_twist = Vec6::Zero();
  out.value = eval<true>(theta, hand_world, &out.d_theta, &out.d_twist);
  return out;
}

template <bool WithGradient>
EnergyBreakdown EnergyEvaluator::eval(const JointVector& theta, const Pose& hand_world,
                                      Eigen::VectorXd* d_theta, Vec6* d_twist) const {
  check_dof(model_, theta);
  EnergyBreakdown e;

  // Link poses in world frame; the ancestor-joint Jacobian formulas work in
  // any frame as long as points and poses agree.
  std::vector<Pose> wposes = model_.forward_kinematics(theta);
  for (Pose& p : wposes) p = hand_world.compose(p);

  const Vec3 hand_origin = hand_world.translation;
  auto add_point_gradient = [&](int link, const Vec3& p_world, const Vec3& g) {
    if constexpr (WithGradient) {
      model_.accumulate_point_gradient(wposes, link, p_world, g, *d_theta);
      d_twist->head<3>() += g;
      d_twist->tail<3>() += (p_world - hand_origin).cross(g);
    } else {
      (void)link;
      (void)p_world;
      (void)g;
    }
  };

  // --- force closure + contact distance over the assigned candidates ---
  const auto& candidates = model_.candidates(assignment_.style);
  const std::size_t n = assignment_.ids.size();
  if (n > 0) {
    std::vector<Vec3> pts(n);
    std::vector<SdfEval> evals(n);
    Eigen::Matrix<double, 6, 1> wrench = Vec6::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const ContactCandidate& cand = candidates.at(assignment_.ids[i]);
      pts[i] = wposes[cand.link].apply(cand.point);
      evals[i] = sdf_world(object_, object_.canonical_pose, pts[i]);
      const Vec3 c = -evals[i].gradient;  // inward object normal at the contact
      wrench.head<3>() += c;
      wrench.tail<3>() += (pts[i] - object_center_world_).cross(c);
      e.e_dis += std::abs(evals[i].value);
    }
    e.e_fc = wrench.norm();

    if constexpr (WithGradient) {
      const double eps = 1e-12;
      const Vec6 wh = e.e_fc > eps ? Vec6(wrench / e.e_fc) : Vec6::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        const ContactCandidate& cand = candidates.at(assignment_.ids[i]);
        const Vec3 c = -evals[i].gradient;
        const Mat3 dn = evals[i].normal_jacobian;  // d(outward normal)/dp
        // d(wrench)/dp_i, 6x3: forces row -dn, torque row -skew(c) - skew(p-o) dn.
        Vec3 g = Vec3::Zero();
        g += (-dn).transpose() * wh.head<3>();
        g += (-skew(c) - skew(pts[i] - object_center_world_) * dn).transpose() * wh.tail<3>();
        // contact-distance term
        if (std::abs(evals[i].value) > eps) {
          g += weights_.w_dis * (evals[i].value > 0 ? 1.0 : -1.0) * evals[i].gradient;
        }
        add_point_gradient(cand.link, pts[i], g);
      }
    }
  }

  // --- penetration: hand spheres vs object and table ---
  const auto& spheres = model_.collision_spheres();
  std::vector<Vec3> sphere_centers(spheres.size());
  double max_sphere_radius = 0.0;
  Vec3 cloud_centroid = Vec3::Zero();
  for (std::size_t s = 0; s < spheres.size(); ++s) {
    sphere_centers[s] = wposes[spheres[s].link].apply(spheres[s].center);
    cloud_centroid += sphere_centers[s];
    max_sphere_radius = std::max(max_sphere_radius, spheres[s].radius);
  }
  cloud_centroid /= static_cast<double>(spheres.size());
  double cloud_radius = 0.0;
  for (const Vec3& c : sphere_centers) {
    cloud_radius = std::max(cloud_radius, (c - cloud_centroid).norm());
  }

  for (std::size_t s = 0; s < spheres.size(); ++s) {
    const double r = spheres[s].radius;
    const SdfEval ev = sdf_world(object_, object_.canonical_pose, sphere_centers[s]);
    if (r - ev.value > 0) {
      e.e_p += r - ev.value;
      if constexpr (WithGradient) {
        add_point_gradient(spheres[s].link, sphere_centers[s], -weights_.w_p * ev.gradient);
      }
    }
    const double table = table_sdf(sphere_centers[s]);
    if (r - table > 0) {
      e.e_p += r - table;
      if constexpr (WithGradient) {
        add_point_gradient(spheres[s].link, sphere_centers[s], Vec3(0, 0, -weights_.w_p));
      }
    }
  }

  // --- penetration: object surface samples inside hand spheres ---
  const double reach = cloud_radius + max_sphere_radius;
  for (const Vec3& qw : object_samples_world_) {
    if ((qw - cloud_centroid).norm() > reach) continue;
    double dmin = std::numeric_limits<double>::max();
    std::size_t smin = 0;
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      const double d = (qw - sphere_centers[s]).norm() - spheres[s].radius;
      if (d < dmin) {
        dmin = d;
        smin = s;
      }
    }
    if (dmin < 0) {
      e.e_p += -dmin;
      if constexpr (WithGradient) {
        const Vec3 diff = qw - sphere_centers[smin];
        const double len = diff.norm();
        if (len > 1e-12) {
          add_point_gradient(spheres[smin].link, sphere_centers[smin],
                             weights_.w_p * diff / len);
        }
      }
    }
  }
  e.e_p += object_sample_table_penalty_;

  // --- self-penetration over non-adjacent sphere pairs ---
  for (const auto& [a, b] : model_.non_adjacent_sphere_pairs()) {
    const Vec3 diff = sphere_centers[a] - sphere_centers[b];
    const double dist = diff.norm();
    const double overlap = spheres[a].radius + spheres[b].radius - dist;
    if (overlap > 0) {
      e.e_sp += overlap;
      if constexpr (WithGradient) {
        if (dist > 1e-12) {
          const Vec3 u = diff / dist;
          add_point_gradient(spheres[a].link, sphere_centers[a], -weights_.w_sp * u);
          add_point_gradient(spheres[b].link, sphere_centers[b], weights_.w_sp * u);
        }
      }
    }
  }

  // --- joint limit violations ---
  for (int i = 0; i < model_.dof(); ++i) {
    const Joint& jt = model_.joints()[i];
    if (theta[i] > jt.upper) {
      e.e_q += theta[i] - jt.upper;
      if constexpr (WithGradient) (*d_theta)[i] += weights_.w_q;
    } else if (theta[i] < jt.lower) {
      e.e_q += jt.lower - theta[i];
      if constexpr (WithGradient) (*d_theta)[i] -= weights_.w_q;
    }
  }

  e.total = e.e_fc + weights_.w_dis * e.e_dis + weights_.w_p * e.e_p + weights_.w_sp * e.e_sp +
            weights_.w_q * e.e_q;
  return e;
}

namespace {
EnergyEvaluator make_eval(const HandModel& model, const ObjectModel& object,
                          const EnergyWeights& weights, const ContactAssignment& assignment) {
  return EnergyEvaluator(model, object, weights, assignment);
}
}  // namespace

double energy_fc(const HandModel& model, const JointVector& theta, const Pose& object_in_hand,
                 const ObjectModel& object, const ContactAssignment& assignment) {
  if (assignment.ids.empty()) {
    throw std::invalid_argument("energy_fc: assignment must be nonempty");
  }
  EnergyEvaluator ev = make_eval(model, object, EnergyWeights{}, assignment);
  return ev.value(theta, ev.hand_world_from_object_in_hand(object_in_hand)).e_fc;
}

double energy_dis(const HandModel& model, const JointVector& theta, const Pose& object_in_hand,
                  const ObjectModel& object, const ContactAssignment& assignment) {
  EnergyEvaluator ev = make_eval(model, object, EnergyWeights{}, assignment);
  return ev.value(theta, ev.hand_world_from_object_in_hand(object_in_hand)).e_dis;
}

double energy_pen(const HandModel& model, const JointVector& theta, const Pose& object_in_hand,
                  const ObjectModel& object) {
  EnergyEvaluator ev = make_eval(model, object, EnergyWeights{}, {});
  return ev.value(theta, ev.hand_world_from_object_in_hand(object_in_hand)).e_p;
}

double energy_spen(const HandModel& model, const JointVector& theta) {
  check_dof(model, theta);
  const auto poses = model.forward_kinematics(theta);
  const auto& spheres = model.collision_spheres();
  double e = 0.0;
  for (const auto& [a, b] : model.non_adjacent_sphere_pairs()) {
    const Vec3 ca = poses[spheres[a].link].apply(spheres[a].center);
    const Vec3 cb = poses[spheres[b].link].apply(spheres[b].center);
    const double overlap = spheres[a].radius + spheres[b].radius - (ca - cb).norm();
    if (overlap > 0) e += overlap;
  }
  return e;
}

double energy_q(const HandModel& model, const JointVector& theta) {
  check_dof(model, theta);
  double e = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    e += std::max(theta[i] - model.joints()[i].upper, 0.0) +
         std::max(model.joints()[i].lower - theta[i], 0.0);
  }
  return e;
}

EnergyBreakdown total_energy(const HandModel& model, const JointVector& theta,
                             const Pose& object_in_hand, const ObjectModel& object,
                             const ContactAssignment& assignment, const EnergyWeights& weights) {
  EnergyEvaluator ev = make_eval(model, object, weights, assignment);
  return ev.value(theta, ev.hand_world_from_object_in_hand(object_in_hand));
}

EnergyGradient energy_gradient(const HandModel& model, const JointVector& theta,
                               const Pose& object_in_hand, const ObjectModel& object,
                               const ContactAssignment& assignment, const EnergyWeights& weights) {
  EnergyEvaluator ev = make_eval(model, object, weights, assignment);
  return ev.value_and_gradient(theta, ev.hand_world_from_object_in_hand(object_in_hand));
}

}  // namespace seqgrasp
