#pragma once

#include <vector>

#include "seqgrasp/geometry.hpp"
#include "seqgrasp/hand_model.hpp"

namespace seqgrasp {

struct EnergyWeights {
  double w_dis = 100.0;
  double w_p = 100.0;
  double w_sp = 10.0;
  double w_q = 1.0;
};

struct EnergyBreakdown {
  double e_fc = 0.0;
  double e_dis = 0.0;
  double e_p = 0.0;
  double e_sp = 0.0;
  double e_q = 0.0;
  double total = 0.0;
};

/// Active contact points, given as candidate indices into the style's set.
struct ContactAssignment {
  GraspStyle style = GraspStyle::kPinch;
  std::vector<int> ids;
};

/// Maps stacked contact forces to the net object wrench (force, torque about
/// `center`). Column block i is [I; skew(p_i - center)].
Eigen::MatrixXd grasp_map(const std::vector<Vec3>& contacts, const Vec3& center);

/// All energies evaluate the object at its canonical world pose W and place
/// the hand at X = W * T^-1, where T is the object pose in the hand frame.
/// The tabletop is the world half-space z >= 0.
///
/// Pose derivatives use the twist chart of apply_twist() acting on the hand
/// world pose X (translation delta-v, rotation delta-omega about the hand
/// origin); see pose.hpp.
struct EnergyGradient {
  EnergyBreakdown value;
  Eigen::VectorXd d_theta;  // dE/dtheta, length = hand DOF
  Vec6 d_twist;             // dE/dxi of the hand world pose
};

/// Evaluates Eq.-style grasp energy terms for one (hand, object) pair with a
/// fixed contact assignment. Immutable after construction; evaluation is
/// const and thread-safe.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const HandModel& model, const ObjectModel& object, EnergyWeights weights,
                  ContactAssignment assignment);

  const ContactAssignment& assignment() const { return assignment_; }
  void set_assignment(ContactAssignment assignment);
  const EnergyWeights& weights() const { return weights_; }

  /// theta + hand-world-pose form used by the optimizer.
  EnergyBreakdown value(const JointVector& theta, const Pose& hand_world) const;
  EnergyGradient value_and_gradient(const JointVector& theta, const Pose& hand_world) const;

  const HandModel& model() const { return model_; }
  const ObjectModel& object() const { return object_; }

  Pose hand_world_from_object_in_hand(const Pose& object_in_hand) const {
    return object_.canonical_pose.compose(object_in_hand.inverse());
  }

 private:
  template <bool WithGradient>
  EnergyBreakdown eval(const JointVector& theta, const Pose& hand_world,
                       Eigen::VectorXd* d_theta, Vec6* d_twist) const;

  const HandModel& model_;
  const ObjectModel& object_;
  EnergyWeights weights_;
  ContactAssignment assignment_;

  std::vector<Vec3> object_samples_world_;  // constant: object is fixed in world
  double object_sample_table_penalty_ = 0.0;
  Vec3 object_center_world_ = Vec3::Zero();
};

// Spec-level single-term entry points (T = object pose in hand frame).
double energy_fc(const HandModel& model, const JointVector& theta, const Pose& object_in_hand,
                 const ObjectModel& object, const ContactAssignment& assignment);
double energy_dis(const HandModel& model, const JointVector& theta, const Pose& object_in_hand,
                  const ObjectModel& object, const ContactAssignment& assignment);
double energy_pen(const HandModel& model, const JointVector& theta, const Pose& object_in_hand,
                  const ObjectModel& object);
double energy_spen(const HandModel& model, const JointVector& theta);
double energy_q(const HandModel& model, const JointVector& theta);

EnergyBreakdown total_energy(const HandModel& model, const JointVector& theta,
                             const Pose& object_in_hand, const ObjectModel& object,
                             const ContactAssignment& assignment, const EnergyWeights& weights);

EnergyGradient energy_gradient(const HandModel& model, const JointVector& theta,
                               const Pose& object_in_hand, const ObjectModel& object,
                               const ContactAssignment& assignment, const EnergyWeights& weights);

}  // namespace seqgrasp
