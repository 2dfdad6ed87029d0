#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seqgrasp/synthesis.hpp"

namespace seqgrasp {

/// Two-object hand configuration assembled from a validated pinch grasp and
/// a validated side grasp with disjoint finger usage.
struct MultiGraspRecord {
  JointVector theta;
  Pose object1_in_hand;  // pinch object (T1)
  Pose object2_in_hand;  // side object (T2)
  std::string object1_id;
  std::string object2_id;
  int source_pinch = -1;  // indices into the source record lists
  int source_side = -1;
  ContactAssignment assignment1;
  ContactAssignment assignment2;
  EnergyBreakdown energy1;  // copied from the source records
  EnergyBreakdown energy2;
  double clearance = 0.0;  // min object-object surface separation [m]
  std::uint64_t seed = 0;
};

/// Fingers touched by an assignment, as finger indices; -1 stands for the
/// palm. Exposed so the disjointness rule is independently testable.
std::set<int> fingers_used(const HandModel& model, const ContactAssignment& assignment);

/// True iff the two grasps touch disjoint finger/joint sets. Throws
/// std::invalid_argument unless the styles are (pinch, side).
bool compatible(const HandModel& model, const GraspRecord& pinch, const GraspRecord& side);

/// Minimum separation between the two object surfaces when both are placed
/// in the hand frame (negative = interpenetration).
double object_clearance(const ObjectModel& object1, const Pose& t1, const ObjectModel& object2,
                        const Pose& t2);

struct MergeReject {
  enum Kind { kIncompatible, kObjectCollision, kSelfPenetration } kind;
};

/// Merges one compatible pair. Uninvolved fingers inherit joint angles from
/// a uniformly chosen source, independently per finger. Returns nullopt with
/// `reject` filled when the merged configuration collides.
std::optional<MultiGraspRecord> merge_grasps(const HandModel& model, const ObjectModel& object1,
                                             const ObjectModel& object2, const GraspRecord& pinch,
                                             const GraspRecord& side, RandomStream& rng,
                                             MergeReject* reject = nullptr);

struct MergeStats {
  long pairs_considered = 0;
  long incompatible = 0;
  long object_collisions = 0;
  long self_penetrations = 0;
  long merged = 0;
};

/// Samples up to `max_pairs` merged records from the compatible cross
/// product, without replacement, deterministically for a fixed seed.
std::vector<MultiGraspRecord> merge_datasets(const HandModel& model, const ObjectModel& object1,
                                             const ObjectModel& object2,
                                             const std::vector<GraspRecord>& pinch_records,
                                             const std::vector<GraspRecord>& side_records,
                                             int max_pairs, std::uint64_t seed,
                                             MergeStats* stats = nullptr);

}  // namespace seqgrasp
