#pragma once

#include <array>
#include <string>
#include <vector>

#include "seqgrasp/geometry.hpp"
#include "seqgrasp/hand_model.hpp"

namespace seqgrasp {

struct ValidationConfig {
  double friction = 0.9;
  double density = 500.0;  // overrides the object's density when > 0
  int cone_facets = 8;
  double activation_distance = 2e-3;  // m
  double squeeze_preload = 1.0;       // N per contact; force cap is 10x this
  double gravity = 9.81;              // m/s^2
};

enum class FailureReason { kNone, kNoContacts, kWrenchInfeasible, kApproachCollision };

const char* to_string(FailureReason r);
FailureReason failure_reason_from_string(const std::string& s);

struct ValidationReport {
  bool rotation_robust = false;
  std::array<double, 6> margins{};  // per gravity direction, see kGravityDirections
  bool execution_feasible = false;
  FailureReason failure = FailureReason::kNone;
  int infeasible_direction = -1;  // first failing direction when wrench-infeasible

  bool valid() const { return rotation_robust && execution_feasible; }
};

/// Hand-frame gravity directions checked by rotation robustness:
/// +x, -x, +y, -y, +z, -z.
extern const std::array<Vec3, 6> kGravityDirections;

struct Contact {
  Vec3 point = Vec3::Zero();    // hand frame
  Vec3 normal = Vec3::UnitX();  // unit, pointing into the object
};

/// Hand collision-sphere surface points within `activation_distance` of the
/// object surface, deduplicated on a 5 mm grid. Everything is expressed in
/// the hand root frame; `object_in_hand` places the object.
std::vector<Contact> detect_contacts(const HandModel& model, const JointVector& theta,
                                     const Pose& object_in_hand, const ObjectModel& object,
                                     double activation_distance);

struct WrenchCheck {
  bool feasible = false;
  double margin = 0.0;
};

/// Linearized friction-cone wrench feasibility for one gravity direction.
/// Positive margin: radius (over a fixed 12-direction wrench probe set) of
/// the ball of disturbance wrenches that the contacts can still absorb.
/// Negative margin: minus the L1 distance from the gravity wrench to the set
/// of realizable wrenches. `torque_origin` is the point torques are taken
/// about (the object centroid).
WrenchCheck wrench_resistible(const std::vector<Contact>& contacts, double mass,
                              const Vec3& gravity_dir, const Vec3& torque_origin,
                              const ValidationConfig& config);

struct RotationRobustness {
  bool robust = false;
  std::array<double, 6> margins{};
  int first_infeasible = -1;
};

RotationRobustness rotation_robustness(const HandModel& model, const JointVector& theta,
                                       const Pose& object_in_hand, const ObjectModel& object,
                                       const ValidationConfig& config);

struct PlacedObject {
  const ObjectModel* object = nullptr;
  Pose world_pose;
};

/// Collision-free straight-line approach check: the hand at the pre-grasp
/// offset pose must be collision-free against the object, obstacles and the
/// table, and the swept path (1 cm resolution) must stay out of the table and
/// never penetrate the object deeper than the activation distance.
bool execution_feasibility(const HandModel& model, const JointVector& theta,
                           const Pose& object_in_hand, const ObjectModel& object,
                           const ValidationConfig& config,
                           const std::vector<PlacedObject>& obstacles = {});

ValidationReport validate(const HandModel& model, const JointVector& theta,
                          const Pose& object_in_hand, const ObjectModel& object,
                          const ValidationConfig& config);

double object_mass(const ObjectModel& object, const ValidationConfig& config);

}  // namespace seqgrasp
