#pragma once

#include <string>
#include <vector>

#include "seqgrasp/merge.hpp"
#include "seqgrasp/validation.hpp"

namespace seqgrasp {

struct PlannerConfig {
  double fingertip_retract = 0.025;  // m, pre-grasp pull-back along tip x-axis
  double fingertip_advance = 0.03;   // m, squeeze target past the surface
  double approach_offset = 0.10;     // m, wrist standoff along -approach axis
  double ik_tolerance = 2e-3;        // m
  double ik_damping = 1e-3;
  int ik_max_iterations = 200;
};

/// Damped-least-squares IK on one finger's serial chain; all other joints
/// stay fixed. Targets and results are in the hand root frame.
struct IkResult {
  bool success = false;
  JointVector theta;  // full hand configuration with the finger updated
  double residual = 0.0;
  int iterations = 0;
};

IkResult finger_ik(const HandModel& model, int finger, const Vec3& target, const JointVector& theta_init,
                   const PlannerConfig& config = {});

struct FingertipStage {
  int finger = -1;
  Vec3 original = Vec3::Zero();   // tip position at the record configuration
  Vec3 axis = Vec3::Zero();       // tip local x-axis in the hand frame
  double pre_residual = 0.0;
  double target_residual = 0.0;
};

/// Squeeze-and-lift plan for one merged record placed in a two-object scene.
/// Stage order: grasp object 1 (pinch), reorient, grasp object 2 (side), lift.
struct ExecutionPlan {
  Pose grasp_pose1, approach_pose1;  // wrist, world
  Pose grasp_pose2, approach_pose2;
  JointVector original_theta;
  JointVector pre_grasp_theta;  // assigned fingertips retracted
  JointVector target_theta;     // assigned fingertips advanced
  std::vector<FingertipStage> fingertips;
};

struct Scene {
  Pose object1_world;  // pinch object
  Pose object2_world;  // side object
};

/// Raised when fingertip IK cannot realize the requested displacement.
class PlanError : public std::runtime_error {
 public:
  explicit PlanError(const std::string& what) : std::runtime_error(what) {}
};

ExecutionPlan make_plan(const HandModel& model, const MultiGraspRecord& record, const Scene& scene,
                        const PlannerConfig& config = {});

enum class TrialStage {
  kPlan = 0,
  kApproach1 = 1,
  kGrasp1 = 2,
  kReorient = 3,
  kApproach2 = 4,
  kGrasp2 = 5
};

struct TrialOutcome {
  bool success = false;
  TrialStage failed_stage = TrialStage::kPlan;  // meaningful when !success
  FailureReason reason = FailureReason::kNone;
  int direction = -1;  // failing gravity direction for wrench failures
};

/// Staged quasi-static execution check:
///  1. approach sweep to the pinch grasp (fingers retracted),
///  2. six-direction wrench robustness for object 1,
///  3. held object 1 re-checked for the reorientation to the side pose,
///  4. approach sweep to the side grasp including held object 1 geometry,
///  5. object 2 wrench feasibility against world gravity at the final pose.
TrialOutcome simulate_execution(const HandModel& model, const ExecutionPlan& plan,
                                const MultiGraspRecord& record, const ObjectModel& object1,
                                const ObjectModel& object2, const Scene& scene,
                                const ValidationConfig& vconfig);

}  // namespace seqgrasp
