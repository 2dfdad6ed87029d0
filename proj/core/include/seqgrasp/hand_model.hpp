#pragma once

#include <string>
#include <utility>
#include <vector>

#include "seqgrasp/pose.hpp"

namespace seqgrasp {

using JointVector = Eigen::VectorXd;
using Matrix3Xd = Eigen::Matrix<double, 3, Eigen::Dynamic>;

enum class GraspStyle { kPinch, kSide };

const char* to_string(GraspStyle style);
GraspStyle grasp_style_from_string(const std::string& s);

struct Link {
  std::string name;
  int parent_joint = -1;  // -1 for the root (palm)
};

struct Joint {
  std::string name;
  int parent_link = -1;
  int child_link = -1;
  Vec3 axis = Vec3::UnitZ();  // unit, in the child frame
  Pose origin;                // child frame at zero angle, in the parent frame
  double lower = 0.0;
  double upper = 0.0;
};

struct Finger {
  std::string name;
  std::vector<int> joints;  // DOF indices, base to tip
  int tip_link = -1;
  Vec3 tip_point = Vec3::Zero();  // fingertip reference point, tip_link frame
};

struct ContactCandidate {
  int link = -1;
  Vec3 point = Vec3::Zero();   // link frame [m]
  Vec3 normal = Vec3::UnitX();  // unit, link frame, out of the pad surface
};

struct CollisionSphere {
  int link = -1;
  Vec3 center = Vec3::Zero();  // link frame [m]
  double radius = 0.0;
};

/// Parametric hand: kinematic tree, joint limits, sphere collision geometry
/// and per-style contact candidates. Immutable after load; all evaluation
/// methods are pure and safe for concurrent use.
class HandModel {
 public:
  /// Loads and validates a hand description (see data/hand_schema.md).
  /// Throws ParseError / InvariantViolation.
  static HandModel load(const std::string& path);
  static HandModel from_json_text(const std::string& text, const std::string& origin_name);

  int dof() const { return static_cast<int>(joints_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  const std::string& name() const { return name_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<Finger>& fingers() const { return fingers_; }
  int palm_link() const { return palm_link_; }
  int root_link() const { return root_link_; }

  const std::vector<ContactCandidate>& candidates(GraspStyle style) const {
    return style == GraspStyle::kPinch ? pinch_candidates_ : side_candidates_;
  }

  /// Unit direction (palm frame) the palm face points at; grasp approaches
  /// run along it.
  const Vec3& approach_axis() const { return approach_axis_; }
  /// Center of the palm contact face, palm frame.
  const Vec3& palm_center() const { return palm_center_; }

  const std::vector<CollisionSphere>& collision_spheres() const { return spheres_; }
  const std::vector<std::pair<int, int>>& non_adjacent_sphere_pairs() const {
    return non_adjacent_sphere_pairs_;
  }

  int link_index(const std::string& name) const;       // -1 when absent
  int finger_of_link(int link) const { return finger_of_link_[link]; }  // -1 for palm
  int finger_index(const std::string& name) const;     // -1 when absent

  JointVector mid_range() const;
  JointVector clamp_to_limits(const JointVector& theta) const;

  /// Per-link world-from-link poses in the hand root frame; root is identity.
  std::vector<Pose> forward_kinematics(const JointVector& theta) const;

  /// 3 x dof Jacobian of a point rigidly attached to `link` (given in link
  /// frame) with respect to the joint vector, at the configuration that
  /// produced `poses`.
  Matrix3Xd point_jacobian(const std::vector<Pose>& poses, int link, const Vec3& local_point) const;

  /// Jacobian of a contact candidate's world position. Throws
  /// std::invalid_argument for an unknown candidate index.
  Matrix3Xd contact_point_jacobian(const JointVector& theta, GraspStyle style, int candidate) const;

  /// Adds jac^T * g into grad without materializing the Jacobian.
  void accumulate_point_gradient(const std::vector<Pose>& poses, int link, const Vec3& world_point,
                                 const Vec3& g, Eigen::Ref<Eigen::VectorXd> grad) const;

  const std::vector<int>& ancestor_joints(int link) const { return ancestor_joints_[link]; }

  /// Hash of the canonical serialized description, embedded in dataset files.
  std::uint64_t content_hash() const { return content_hash_; }

 private:
  void validate() const;
  void finalize();

  std::string name_;
  std::vector<Link> links_;
  std::vector<Joint> joints_;
  std::vector<Finger> fingers_;
  std::vector<ContactCandidate> pinch_candidates_;
  std::vector<ContactCandidate> side_candidates_;
  std::vector<CollisionSphere> spheres_;
  int palm_link_ = -1;
  int root_link_ = -1;
  Vec3 approach_axis_ = Vec3::UnitX();
  Vec3 palm_center_ = Vec3::Zero();
  std::uint64_t content_hash_ = 0;

  std::vector<int> topo_joints_;                      // joint evaluation order
  std::vector<std::vector<int>> ancestor_joints_;     // per link, root to leaf
  std::vector<int> finger_of_link_;
  std::vector<std::pair<int, int>> non_adjacent_sphere_pairs_;
};

void check_dof(const HandModel& model, const JointVector& theta);

}  // namespace seqgrasp
