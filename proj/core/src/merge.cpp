#include "seqgrasp/merge.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace seqgrasp {

std::set<int> fingers_used(const HandModel& model, const ContactAssignment& assignment) {
  std::set<int> used;
  for (int id : assignment.ids) {
    const ContactCandidate& c = model.candidates(assignment.style).at(id);
    used.insert(model.finger_of_link(c.link));  // palm maps to -1
  }
  return used;
}

bool compatible(const HandModel& model, const GraspRecord& pinch, const GraspRecord& side) {
  if (pinch.style != GraspStyle::kPinch || side.style != GraspStyle::kSide) {
    throw std::invalid_argument("compatible: expected a (pinch, side) record pair, got (" +
                                std::string(to_string(pinch.style)) + ", " +
                                to_string(side.style) + ")");
  }
  const std::set<int> a = fingers_used(model, pinch.assignment);
  const std::set<int> b = fingers_used(model, side.assignment);
  std::vector<int> overlap;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(overlap));
  return overlap.empty();
}

double object_clearance(const ObjectModel& object1, const Pose& t1, const ObjectModel& object2,
                        const Pose& t2) {
  double min_sep = std::numeric_limits<double>::max();
  // Samples of each object probed against the other's SDF; symmetric probe
  // catches thin-feature overlaps the one-sided check can miss.
  for (const Vec3& q : object2.surface_samples.points) {
    min_sep = std::min(min_sep, sdf_world(object1, t1, t2.apply(q)).value);
  }
  for (const Vec3& q : object1.surface_samples.points) {
    min_sep = std::min(min_sep, sdf_world(object2, t2, t1.apply(q)).value);
  }
  return min_sep;
}

std::optional<MultiGraspRecord> merge_grasps(const HandModel& model, const ObjectModel& object1,
                                             const ObjectModel& object2, const GraspRecord& pinch,
                                             const GraspRecord& side, RandomStream& rng,
                                             MergeReject* reject) {
  if (!compatible(model, pinch, side)) {
    if (reject) reject->kind = MergeReject::kIncompatible;
    return std::nullopt;
  }

  const std::set<int> pinch_fingers = fingers_used(model, pinch.assignment);
  const std::set<int> side_fingers = fingers_used(model, side.assignment);

  // Finger-by-finger joint assembly; uninvolved fingers inherit from a
  // uniformly chosen source, independently per finger.
  JointVector theta = pinch.theta;
  for (int fi = 0; fi < static_cast<int>(model.fingers().size()); ++fi) {
    const Finger& finger = model.fingers()[fi];
    const JointVector* source = nullptr;
    if (pinch_fingers.count(fi)) {
      source = &pinch.theta;
    } else if (side_fingers.count(fi)) {
      source = &side.theta;
    } else {
      source = rng.uniform() < 0.5 ? &pinch.theta : &side.theta;
    }
    for (int ji : finger.joints) theta[ji] = (*source)[ji];
  }

  const double clearance = object_clearance(object1, pinch.object_in_hand, object2,
                                            side.object_in_hand);
  if (clearance < 0.0) {
    if (reject) reject->kind = MergeReject::kObjectCollision;
    return std::nullopt;
  }
  if (energy_spen(model, theta) > 0.0) {
    if (reject) reject->kind = MergeReject::kSelfPenetration;
    return std::nullopt;
  }

  MultiGraspRecord rec;
  rec.theta = std::move(theta);
  rec.object1_in_hand = pinch.object_in_hand;
  rec.object2_in_hand = side.object_in_hand;
  rec.object1_id = pinch.object_id;
  rec.object2_id = side.object_id;
  rec.assignment1 = pinch.assignment;
  rec.assignment2 = side.assignment;
  rec.energy1 = pinch.energy;
  rec.energy2 = side.energy;
  rec.clearance = clearance;
  return rec;
}

std::vector<MultiGraspRecord> merge_datasets(const HandModel& model, const ObjectModel& object1,
                                             const ObjectModel& object2,
                                             const std::vector<GraspRecord>& pinch_records,
                                             const std::vector<GraspRecord>& side_records,
                                             int max_pairs, std::uint64_t seed,
                                             MergeStats* stats) {
  std::vector<MultiGraspRecord> merged;
  MergeStats local;
  RandomStream rng(RandomStream::splitmix64(seed ^ 0x6d657267ULL));

  // Shuffled cross product, sampled without replacement.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(pinch_records.size() * side_records.size());
  for (int i = 0; i < static_cast<int>(pinch_records.size()); ++i) {
    for (int j = 0; j < static_cast<int>(side_records.size()); ++j) {
      pairs.emplace_back(i, j);
    }
  }
  for (std::size_t i = pairs.size(); i > 1; --i) {
    std::swap(pairs[i - 1], pairs[rng.uniform_index(i)]);
  }

  for (const auto& [i, j] : pairs) {
    if (static_cast<int>(merged.size()) >= max_pairs) break;
    ++local.pairs_considered;
    MergeReject reject{MergeReject::kIncompatible};
    auto rec = merge_grasps(model, object1, object2, pinch_records[i], side_records[j], rng,
                            &reject);
    if (!rec) {
      switch (reject.kind) {
        case MergeReject::kIncompatible: ++local.incompatible; break;
        case MergeReject::kObjectCollision: ++local.object_collisions; break;
        case MergeReject::kSelfPenetration: ++local.self_penetrations; break;
      }
      continue;
    }
    rec->source_pinch = i;
    rec->source_side = j;
    rec->seed = seed;
    merged.push_back(std::move(*rec));
    ++local.merged;
  }
  if (stats) *stats = local;
  return merged;
}

}  // namespace seqgrasp
