#include "seqgrasp/exec_planner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace seqgrasp {

IkResult finger_ik(const HandModel& model, int finger, const Vec3& target,
                   const JointVector& theta_init, const PlannerConfig& config) {
  if (finger < 0 || finger >= static_cast<int>(model.fingers().size())) {
    throw std::invalid_argument("finger_ik: unknown finger index " + std::to_string(finger));
  }
  const Finger& f = model.fingers()[finger];

  IkResult res;
  res.theta = theta_init;

  auto tip_position = [&](const JointVector& theta) {
    const auto poses = model.forward_kinematics(theta);
    return poses[f.tip_link].apply(f.tip_point);
  };

  Vec3 residual = target - tip_position(res.theta);
  res.residual = residual.norm();
  if (res.residual < config.ik_tolerance) {
    res.success = true;
    return res;
  }

  const int k = static_cast<int>(f.joints.size());
  const double lambda2 = config.ik_damping * config.ik_damping;
  for (int it = 1; it <= config.ik_max_iterations; ++it) {
    const auto poses = model.forward_kinematics(res.theta);
    const Matrix3Xd full = model.point_jacobian(poses, f.tip_link, f.tip_point);
    Eigen::MatrixXd jac(3, k);
    for (int c = 0; c < k; ++c) jac.col(c) = full.col(f.joints[c]);

    const Mat3 jjt = jac * jac.transpose() + lambda2 * Mat3::Identity();
    const Eigen::VectorXd dq = jac.transpose() * jjt.ldlt().solve(residual);
    for (int c = 0; c < k; ++c) {
      const int ji = f.joints[c];
      res.theta[ji] = std::clamp(res.theta[ji] + dq[c], model.joints()[ji].lower,
                                 model.joints()[ji].upper);
    }
    residual = target - tip_position(res.theta);
    res.residual = residual.norm();
    res.iterations = it;
    if (res.residual < config.ik_tolerance) {
      res.success = true;
      return res;
    }
  }
  return res;
}

namespace {

std::set<int> assigned_fingers(const HandModel& model, const ContactAssignment& assignment) {
  std::set<int> out = fingers_used(model, assignment);
  out.erase(-1);  // palm carries no joints
  return out;
}

JointVector compose_fingers(const HandModel& model, const JointVector& base,
                            const JointVector& source, const std::set<int>& fingers) {
  JointVector out = base;
  for (int fi : fingers) {
    for (int ji : model.fingers()[fi].joints) out[ji] = source[ji];
  }
  return out;
}

}  // namespace

ExecutionPlan make_plan(const HandModel& model, const MultiGraspRecord& record, const Scene& scene,
                        const PlannerConfig& config) {
  ExecutionPlan plan;
  plan.grasp_pose1 = scene.object1_world.compose(record.object1_in_hand.inverse());
  plan.grasp_pose2 = scene.object2_world.compose(record.object2_in_hand.inverse());
  plan.approach_pose1 = plan.grasp_pose1;
  plan.approach_pose1.translation -=
      config.approach_offset * (plan.grasp_pose1.rotation * model.approach_axis());
  plan.approach_pose2 = plan.grasp_pose2;
  plan.approach_pose2.translation -=
      config.approach_offset * (plan.grasp_pose2.rotation * model.approach_axis());

  plan.original_theta = record.theta;
  plan.pre_grasp_theta = record.theta;
  plan.target_theta = record.theta;

  std::set<int> fingers = assigned_fingers(model, record.assignment1);
  const std::set<int> side = assigned_fingers(model, record.assignment2);
  fingers.insert(side.begin(), side.end());

  const auto poses = model.forward_kinematics(record.theta);
  for (int fi : fingers) {
    const Finger& f = model.fingers()[fi];
    FingertipStage stage;
    stage.finger = fi;
    stage.original = poses[f.tip_link].apply(f.tip_point);
    stage.axis = poses[f.tip_link].rotation.col(0);  // tip local x-axis

    const IkResult pre = finger_ik(model, fi, stage.original - config.fingertip_retract * stage.axis,
                                   record.theta, config);
    if (!pre.success) {
      throw PlanError("finger '" + f.name + "': pre-grasp fingertip target unreachable (residual " +
                      std::to_string(pre.residual) + " m)");
    }
    const IkResult tgt = finger_ik(model, fi, stage.original + config.fingertip_advance * stage.axis,
                                   record.theta, config);
    if (!tgt.success) {
      throw PlanError("finger '" + f.name + "': squeeze fingertip target unreachable (residual " +
                      std::to_string(tgt.residual) + " m)");
    }
    stage.pre_residual = pre.residual;
    stage.target_residual = tgt.residual;
    for (int ji : f.joints) {
      plan.pre_grasp_theta[ji] = pre.theta[ji];
      plan.target_theta[ji] = tgt.theta[ji];
    }
    plan.fingertips.push_back(stage);
  }
  return plan;
}

namespace {

/// Collision state of the hand (plus an optionally attached object) at one
/// wrist pose. The grasp target allows hand penetration up to `allowance`;
/// the table and obstacle objects allow none.
bool body_collision_free(const HandModel& model, const std::vector<Pose>& links, const Pose& x,
                         const ObjectModel& target, const Pose& target_world, double allowance,
                         const std::vector<PlacedObject>& obstacles, const ObjectModel* held,
                         const Pose& held_in_hand) {
  constexpr double kTol = 1e-9;
  for (const CollisionSphere& s : model.collision_spheres()) {
    const Vec3 c = x.compose(links[s.link]).apply(s.center);
    if (s.radius - table_sdf(c) > kTol) return false;
    if (s.radius - sdf_world(target, target_world, c).value > allowance + kTol) return false;
    for (const PlacedObject& obs : obstacles) {
      if (s.radius - sdf_world(*obs.object, obs.world_pose, c).value > kTol) return false;
    }
  }
  if (held != nullptr) {
    const Pose held_world = x.compose(held_in_hand);
    for (const Vec3& q : held->surface_samples.points) {
      const Vec3 qw = held_world.apply(q);
      if (-table_sdf(qw) > kTol) return false;
      if (-sdf_world(target, target_world, qw).value > kTol) return false;
      for (const PlacedObject& obs : obstacles) {
        if (-sdf_world(*obs.object, obs.world_pose, qw).value > kTol) return false;
      }
    }
  }
  return true;
}

bool sweep_collision_free(const HandModel& model, const std::vector<Pose>& links, const Pose& from,
                          const Pose& to, const ObjectModel& target, const Pose& target_world,
                          double allowance, const std::vector<PlacedObject>& obstacles,
                          const ObjectModel* held, const Pose& held_in_hand) {
  // Offset pose itself: no penetration at all.
  if (!body_collision_free(model, links, from, target, target_world, 0.0, obstacles, held,
                           held_in_hand)) {
    return false;
  }
  const double dist = (to.translation - from.translation).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(dist / 0.01)));
  for (int i = 1; i <= steps; ++i) {
    Pose x = from;
    x.translation =
        from.translation + (to.translation - from.translation) * (static_cast<double>(i) / steps);
    if (!body_collision_free(model, links, x, target, target_world, allowance, obstacles, held,
                             held_in_hand)) {
      return false;
    }
  }
  return true;
}

TrialOutcome fail(TrialStage stage, FailureReason reason, int direction = -1) {
  TrialOutcome out;
  out.success = false;
  out.failed_stage = stage;
  out.reason = reason;
  out.direction = direction;
  return out;
}

}  // namespace

TrialOutcome simulate_execution(const HandModel& model, const ExecutionPlan& plan,
                                const MultiGraspRecord& record, const ObjectModel& object1,
                                const ObjectModel& object2, const Scene& scene,
                                const ValidationConfig& vconfig) {
  const std::set<int> pinch_fingers = assigned_fingers(model, record.assignment1);
  const std::set<int> side_fingers = assigned_fingers(model, record.assignment2);

  // Stage 1: approach the pinch grasp with its fingers retracted.
  const JointVector theta_s1 =
      compose_fingers(model, record.theta, plan.pre_grasp_theta, pinch_fingers);
  {
    const auto links = model.forward_kinematics(theta_s1);
    const std::vector<PlacedObject> obstacles = {{&object2, scene.object2_world}};
    if (!sweep_collision_free(model, links, plan.approach_pose1, plan.grasp_pose1, object1,
                              scene.object1_world, vconfig.activation_distance, obstacles, nullptr,
                              Pose::identity())) {
      return fail(TrialStage::kApproach1, FailureReason::kApproachCollision);
    }
  }

  // Stage 2: close to the squeeze target; contact geometry is evaluated at
  // the record configuration where the fingers meet the surface.
  {
    const RotationRobustness rot =
        rotation_robustness(model, record.theta, record.object1_in_hand, object1, vconfig);
    if (rot.first_infeasible == -2) return fail(TrialStage::kGrasp1, FailureReason::kNoContacts);
    if (!rot.robust) {
      return fail(TrialStage::kGrasp1, FailureReason::kWrenchInfeasible, rot.first_infeasible);
    }
  }

  // Stage 3: the held object must stay wrench-feasible while the hand
  // reorients to the side-grasp pose with the side fingers retracted.
  const JointVector theta_s4 =
      compose_fingers(model, record.theta, plan.pre_grasp_theta, side_fingers);
  {
    const RotationRobustness rot =
        rotation_robustness(model, theta_s4, record.object1_in_hand, object1, vconfig);
    if (rot.first_infeasible == -2) return fail(TrialStage::kReorient, FailureReason::kNoContacts);
    if (!rot.robust) {
      return fail(TrialStage::kReorient, FailureReason::kWrenchInfeasible, rot.first_infeasible);
    }
  }

  // Stage 4: approach the side grasp carrying object 1.
  {
    const auto links = model.forward_kinematics(theta_s4);
    if (!sweep_collision_free(model, links, plan.approach_pose2, plan.grasp_pose2, object2,
                              scene.object2_world, vconfig.activation_distance, {}, &object1,
                              record.object1_in_hand)) {
      return fail(TrialStage::kApproach2, FailureReason::kApproachCollision);
    }
  }

  // Stage 5: lift -- object 2 must hold against world gravity at the final
  // wrist orientation.
  {
    const auto contacts = detect_contacts(model, record.theta, record.object2_in_hand, object2,
                                          vconfig.activation_distance);
    if (contacts.empty()) return fail(TrialStage::kGrasp2, FailureReason::kNoContacts);
    const Vec3 gravity_hand = plan.grasp_pose2.rotation.transpose() * Vec3(0, 0, -1);
    const WrenchCheck check =
        wrench_resistible(contacts, object_mass(object2, vconfig), gravity_hand,
                          record.object2_in_hand.translation, vconfig);
    if (!check.feasible) {
      return fail(TrialStage::kGrasp2, FailureReason::kWrenchInfeasible);
    }
  }

  TrialOutcome out;
  out.success = true;
  out.failed_stage = TrialStage::kGrasp2;
  out.reason = FailureReason::kNone;
  return out;
}

}  // namespace seqgrasp
