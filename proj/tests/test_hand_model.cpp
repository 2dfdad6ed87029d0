#include <doctest.h>

#include <Eigen/Dense>
#include <set>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/hand_model.hpp"
#include "seqgrasp/random.hpp"

using namespace seqgrasp;

namespace {

const char* kToyHand = R"({
  "name": "toy",
  "links": [{"name": "palm"}, {"name": "index_distal"}],
  "joints": [
    {"name": "j0", "parent": "palm", "child": "index_distal",
     "axis": [0, 0, 1], "origin": {"xyz": [0.1, 0.0, 0.0], "rpy": [0, 0, 0]},
     "limits": [-1.5, 1.5]}
  ],
  "palm_link": "palm",
  "fingers": {
    "index": {"joints": ["j0"], "tip_link": "index_distal", "tip_point": [0.05, 0, 0]}
  },
  "contact_candidates": {
    "pinch": [{"link": "index_distal", "point": [0.05, 0.0, 0.0], "normal": [0, 1, 0]}],
    "side": [{"link": "palm", "point": [0.0, 0.01, 0.0], "normal": [0, 1, 0]}]
  },
  "collision_spheres": {
    "palm": [{"center": [0, 0, 0], "radius": 0.01}],
    "index_distal": [{"center": [0.05, 0, 0], "radius": 0.01}]
  }
})";

// Independent FK oracle: plain 4x4 homogeneous-matrix composition, walking
// parent chains without reusing Pose arithmetic.
Eigen::Matrix4d hom(const Mat3& r, const Vec3& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Eigen::Matrix4d reference_link_pose(const HandModel& model, const JointVector& theta, int link) {
  if (link == model.root_link()) return Eigen::Matrix4d::Identity();
  const int ji = model.links()[link].parent_joint;
  const Joint& jt = model.joints()[ji];
  Eigen::AngleAxisd rot(theta[ji], jt.axis);
  return reference_link_pose(model, theta, jt.parent_link) *
         hom(jt.origin.rotation, jt.origin.translation) *
         hom(rot.toRotationMatrix(), Vec3::Zero());
}

JointVector random_theta_within_limits(const HandModel& model, RandomStream& rng) {
  JointVector theta(model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    theta[i] = rng.uniform(model.joints()[i].lower, model.joints()[i].upper);
  }
  return theta;
}

}  // namespace

TEST_CASE("bundled allegro_lite parses with the documented structure") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  CHECK(model.dof() == 16);
  CHECK(model.fingers().size() == 4);
  CHECK(model.num_links() == 17);
  CHECK(model.palm_link() == model.root_link());

  std::set<std::string> names;
  for (const auto& f : model.fingers()) names.insert(f.name);
  CHECK(names == std::set<std::string>{"thumb", "index", "middle", "ring"});

  // Finger groups partition the 16 joints.
  std::set<int> all;
  for (const auto& f : model.fingers()) {
    CHECK(f.joints.size() == 4);
    all.insert(f.joints.begin(), f.joints.end());
  }
  CHECK(all.size() == 16);

  CHECK(model.candidates(GraspStyle::kPinch).size() >= 3);
  CHECK(model.candidates(GraspStyle::kSide).size() >= 4);
}

TEST_CASE("style rules confine candidates to the documented links") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  for (const auto& c : model.candidates(GraspStyle::kPinch)) {
    const int fi = model.finger_of_link(c.link);
    REQUIRE(fi >= 0);
    const std::string& name = model.fingers()[fi].name;
    CHECK((name == "thumb" || name == "index" || name == "middle"));
  }
  for (const auto& c : model.candidates(GraspStyle::kSide)) {
    const int fi = model.finger_of_link(c.link);
    const std::string name = fi >= 0 ? model.fingers()[fi].name : "palm";
    CHECK((name == "ring" || name == "palm"));
  }
}

TEST_CASE("degenerate joint limits are rejected") {
  std::string text = kToyHand;
  const auto pos = text.find("[-1.5, 1.5]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "[0.5, 0.5]");
  CHECK_THROWS_AS(HandModel::from_json_text(text, "toy"), InvariantViolation);
}

TEST_CASE("pinch candidate on a ring link is rejected") {
  // Same chain as the toy hand, but the finger is the ring finger: the pinch
  // candidate now sits on a ring link.
  std::string text = kToyHand;
  size_t pos;
  while ((pos = text.find("index")) != std::string::npos) text.replace(pos, 5, "ring");
  CHECK_THROWS_AS(HandModel::from_json_text(text, "toy"), InvariantViolation);
}

TEST_CASE("zero configuration composes fixed origin transforms") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  const auto poses = model.forward_kinematics(JointVector::Zero(16));
  const int index_base = model.link_index("index_base");
  CHECK(poses[index_base].translation.isApprox(Vec3(0.0, 0.095, -0.045), 1e-12));
  const int index_prox = model.link_index("index_proximal");
  CHECK(poses[index_prox].translation.isApprox(Vec3(0.0, 0.1114, -0.045), 1e-12));
  CHECK(poses[model.palm_link()].rotation.isApprox(Mat3::Identity(), 1e-15));
}

TEST_CASE("single revolute joint rotates the child by the joint angle") {
  const HandModel model = HandModel::from_json_text(kToyHand, "toy");
  JointVector theta(1);
  theta[0] = M_PI / 2;
  const auto poses = model.forward_kinematics(theta);
  const Pose& child = poses[model.link_index("index_distal")];
  CHECK(child.translation.isApprox(Vec3(0.1, 0, 0), 1e-12));
  CHECK(child.apply(Vec3(0.05, 0, 0)).isApprox(Vec3(0.1, 0.05, 0), 1e-12));
}

TEST_CASE("forward kinematics matches the homogeneous-transform oracle") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  RandomStream rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const JointVector theta = random_theta_within_limits(model, rng);
    const auto poses = model.forward_kinematics(theta);
    for (int li = 0; li < model.num_links(); ++li) {
      const Eigen::Matrix4d ref = reference_link_pose(model, theta, li);
      CHECK(poses[li].rotation.isApprox(ref.topLeftCorner<3, 3>(), 1e-10));
      CHECK(poses[li].translation.isApprox(Vec3(ref.topRightCorner<3, 1>()), 1e-10));
    }
  }
}

TEST_CASE("FK is deterministic bit-for-bit") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  RandomStream rng(7);
  const JointVector theta = random_theta_within_limits(model, rng);
  const auto a = model.forward_kinematics(theta);
  const auto b = model.forward_kinematics(theta);
  for (int li = 0; li < model.num_links(); ++li) {
    CHECK(a[li].rotation == b[li].rotation);
    CHECK(a[li].translation == b[li].translation);
  }
}

TEST_CASE("candidate on the palm has a zero Jacobian") {
  const HandModel model = HandModel::from_json_text(kToyHand, "toy");
  const Matrix3Xd jac = model.contact_point_jacobian(JointVector::Zero(1), GraspStyle::kSide, 0);
  CHECK(jac.norm() == 0.0);
}

TEST_CASE("one-joint lever Jacobian is tangential with norm r") {
  const HandModel model = HandModel::from_json_text(kToyHand, "toy");
  const Matrix3Xd jac = model.contact_point_jacobian(JointVector::Zero(1), GraspStyle::kPinch, 0);
  // Candidate sits 0.05 m from the joint axis.
  CHECK(jac.col(0).norm() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(jac.col(0).dot(Vec3(1, 0, 0)) == doctest::Approx(0.0));  // tangential
  CHECK(jac(1, 0) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("unknown candidate id raises") {
  const HandModel model = HandModel::from_json_text(kToyHand, "toy");
  CHECK_THROWS_AS(model.contact_point_jacobian(JointVector::Zero(1), GraspStyle::kPinch, 5),
                  std::invalid_argument);
}

TEST_CASE("contact Jacobians match central finite differences") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  RandomStream rng(113);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector theta = random_theta_within_limits(model, rng);
    const GraspStyle style = trial % 2 == 0 ? GraspStyle::kPinch : GraspStyle::kSide;
    const auto& cands = model.candidates(style);
    const int ci = trial % static_cast<int>(cands.size());
    const Matrix3Xd jac = model.contact_point_jacobian(theta, style, ci);

    for (int k = 0; k < model.dof(); ++k) {
      JointVector tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const auto pp = model.forward_kinematics(tp);
      const auto pm = model.forward_kinematics(tm);
      const Vec3 fd = (pp[cands[ci].link].apply(cands[ci].point) -
                       pm[cands[ci].link].apply(cands[ci].point)) /
                      (2 * h);
      CHECK((jac.col(k) - fd).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("limit clamping is idempotent") {
  const HandModel model = HandModel::load("data/allegro_lite.json");
  RandomStream rng(5);
  JointVector theta(model.dof());
  for (int i = 0; i < model.dof(); ++i) theta[i] = rng.uniform(-4.0, 4.0);
  const JointVector once = model.clamp_to_limits(theta);
  const JointVector twice = model.clamp_to_limits(once);
  CHECK(once == twice);
}
