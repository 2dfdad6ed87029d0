#include "seqgrasp/hand_model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/hash.hpp"

namespace seqgrasp {

using nlohmann::json;

const char* to_string(GraspStyle style) {
  return style == GraspStyle::kPinch ? "pinch" : "side";
}

GraspStyle grasp_style_from_string(const std::string& s) {
  if (s == "pinch") return GraspStyle::kPinch;
  if (s == "side") return GraspStyle::kSide;
  throw ParseError("unknown grasp style '" + s + "' (expected 'pinch' or 'side')");
}

namespace {

Vec3 read_vec3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(ctx + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

const json& require_field(const json& j, const char* field, const std::string& ctx) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw ParseError(ctx + ": missing field '" + field + "'");
  }
  return *it;
}

}  // namespace

int HandModel::link_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(links_.size()); ++i) {
    if (links_[i].name == name) return i;
  }
  return -1;
}

int HandModel::finger_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(fingers_.size()); ++i) {
    if (fingers_[i].name == name) return i;
  }
  return -1;
}

HandModel HandModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("hand model file not found: " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

HandModel HandModel::from_json_text(const std::string& text, const std::string& origin_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin_name + ": " + e.what());
  }

  HandModel m;
  m.content_hash_ = fnv1a64(text);
  m.name_ = j.value("name", origin_name);

  const json& jlinks = require_field(j, "links", origin_name);
  for (const auto& jl : jlinks) {
    Link link;
    link.name = require_field(jl, "name", "link").get<std::string>();
    m.links_.push_back(link);
  }

  const json& jjoints = require_field(j, "joints", origin_name);
  for (const auto& jj : jjoints) {
    Joint joint;
    joint.name = require_field(jj, "name", "joint").get<std::string>();
    const std::string ctx = "joint '" + joint.name + "'";
    joint.parent_link = m.link_index(require_field(jj, "parent", ctx).get<std::string>());
    joint.child_link = m.link_index(require_field(jj, "child", ctx).get<std::string>());
    if (joint.parent_link < 0 || joint.child_link < 0) {
      throw ParseError(ctx + ": parent or child names an unknown link");
    }
    joint.axis = read_vec3(require_field(jj, "axis", ctx), ctx + ".axis");
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9) {
      throw ParseError(ctx + ".axis: must be a unit vector");
    }
    const json& jo = require_field(jj, "origin", ctx);
    joint.origin.translation = read_vec3(require_field(jo, "xyz", ctx), ctx + ".origin.xyz");
    Vec3 rpy = read_vec3(require_field(jo, "rpy", ctx), ctx + ".origin.rpy");
    joint.origin.rotation = rpy_to_rotation(rpy.x(), rpy.y(), rpy.z());
    const json& jl = require_field(jj, "limits", ctx);
    if (!jl.is_array() || jl.size() != 2) {
      throw ParseError(ctx + ".limits: expected [lower, upper]");
    }
    joint.lower = jl[0].get<double>();
    joint.upper = jl[1].get<double>();
    m.joints_.push_back(joint);
  }

  m.palm_link_ = m.link_index(require_field(j, "palm_link", origin_name).get<std::string>());
  if (m.palm_link_ < 0) {
    throw ParseError(origin_name + ": palm_link names an unknown link");
  }
  if (j.contains("approach_axis")) {
    m.approach_axis_ = read_vec3(j["approach_axis"], "approach_axis");
    if (std::abs(m.approach_axis_.norm() - 1.0) > 1e-9) {
      throw ParseError(origin_name + ": approach_axis must be a unit vector");
    }
  }
  if (j.contains("palm_center")) {
    m.palm_center_ = read_vec3(j["palm_center"], "palm_center");
  }

  const json& jfingers = require_field(j, "fingers", origin_name);
  for (auto it = jfingers.begin(); it != jfingers.end(); ++it) {
    Finger f;
    f.name = it.key();
    const std::string ctx = "finger '" + f.name + "'";
    for (const auto& jn : require_field(*it, "joints", ctx)) {
      const std::string jname = jn.get<std::string>();
      int idx = -1;
      for (int k = 0; k < static_cast<int>(m.joints_.size()); ++k) {
        if (m.joints_[k].name == jname) idx = k;
      }
      if (idx < 0) throw ParseError(ctx + ": unknown joint '" + jname + "'");
      f.joints.push_back(idx);
    }
    f.tip_link = m.link_index(require_field(*it, "tip_link", ctx).get<std::string>());
    if (f.tip_link < 0) throw ParseError(ctx + ": unknown tip_link");
    f.tip_point = read_vec3(require_field(*it, "tip_point", ctx), ctx + ".tip_point");
    m.fingers_.push_back(std::move(f));
  }

  const json& jspheres = require_field(j, "collision_spheres", origin_name);
  for (auto it = jspheres.begin(); it != jspheres.end(); ++it) {
    int link = m.link_index(it.key());
    if (link < 0) throw ParseError("collision_spheres: unknown link '" + it.key() + "'");
    for (const auto& js : *it) {
      CollisionSphere s;
      s.link = link;
      s.center = read_vec3(require_field(js, "center", it.key()), it.key() + ".center");
      s.radius = js.value("radius", 0.0);
      if (s.radius <= 0.0) throw ParseError("collision_spheres." + it.key() + ": radius must be > 0");
      m.spheres_.push_back(s);
    }
  }

  const json& jcand = require_field(j, "contact_candidates", origin_name);
  auto parse_candidates = [&](const char* key, std::vector<ContactCandidate>& out) {
    for (const auto& jc : require_field(jcand, key, "contact_candidates")) {
      ContactCandidate c;
      const std::string link_name = require_field(jc, "link", key).get<std::string>();
      c.link = m.link_index(link_name);
      if (c.link < 0) {
        throw InvariantViolation(std::string("contact candidate references an unknown link: '") +
                                 link_name + "'");
      }
      c.point = read_vec3(require_field(jc, "point", key), std::string(key) + ".point");
      c.normal = read_vec3(require_field(jc, "normal", key), std::string(key) + ".normal");
      out.push_back(c);
    }
  };
  parse_candidates("pinch", m.pinch_candidates_);
  parse_candidates("side", m.side_candidates_);

  m.finalize();
  m.validate();
  return m;
}

void HandModel::finalize() {
  const int n_links = num_links();

  // Parent joint per link and root discovery.
  std::vector<int> parent_joint(n_links, -1);
  for (int ji = 0; ji < dof(); ++ji) {
    if (parent_joint[joints_[ji].child_link] != -1) {
      throw InvariantViolation("kinematic tree: link '" + links_[joints_[ji].child_link].name +
                               "' has more than one parent joint");
    }
    parent_joint[joints_[ji].child_link] = ji;
  }
  for (int li = 0; li < n_links; ++li) links_[li].parent_joint = parent_joint[li];

  root_link_ = -1;
  for (int li = 0; li < n_links; ++li) {
    if (parent_joint[li] == -1) {
      if (root_link_ != -1) {
        throw InvariantViolation("kinematic tree: multiple root links ('" +
                                 links_[root_link_].name + "', '" + links_[li].name + "')");
      }
      root_link_ = li;
    }
  }
  if (root_link_ == -1) {
    throw InvariantViolation("kinematic tree: no root link (cycle)");
  }

  // Topological joint order and per-link ancestor joint chains.
  ancestor_joints_.assign(n_links, {});
  std::vector<bool> placed(n_links, false);
  placed[root_link_] = true;
  topo_joints_.clear();
  bool progress = true;
  while (static_cast<int>(topo_joints_.size()) < dof() && progress) {
    progress = false;
    for (int ji = 0; ji < dof(); ++ji) {
      const Joint& jt = joints_[ji];
      if (!placed[jt.child_link] && placed[jt.parent_link]) {
        placed[jt.child_link] = true;
        ancestor_joints_[jt.child_link] = ancestor_joints_[jt.parent_link];
        ancestor_joints_[jt.child_link].push_back(ji);
        topo_joints_.push_back(ji);
        progress = true;
      }
    }
  }
  if (static_cast<int>(topo_joints_.size()) < dof()) {
    throw InvariantViolation("kinematic tree: not a single acyclic tree rooted at the palm");
  }

  // Link -> finger ownership via each finger's joint set.
  finger_of_link_.assign(n_links, -1);
  for (int fi = 0; fi < static_cast<int>(fingers_.size()); ++fi) {
    std::set<int> fset(fingers_[fi].joints.begin(), fingers_[fi].joints.end());
    for (int li = 0; li < n_links; ++li) {
      for (int ji : ancestor_joints_[li]) {
        if (fset.count(ji)) {
          finger_of_link_[li] = fi;
          break;
        }
      }
    }
  }

  // Sphere pairs eligible for the self-penetration term: different links that
  // are not joined by a joint.
  non_adjacent_sphere_pairs_.clear();
  auto links_adjacent = [&](int a, int b) {
    for (const Joint& jt : joints_) {
      if ((jt.parent_link == a && jt.child_link == b) ||
          (jt.parent_link == b && jt.child_link == a)) {
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < static_cast<int>(spheres_.size()); ++i) {
    for (int k = i + 1; k < static_cast<int>(spheres_.size()); ++k) {
      const int la = spheres_[i].link;
      const int lb = spheres_[k].link;
      if (la == lb || links_adjacent(la, lb)) continue;
      non_adjacent_sphere_pairs_.emplace_back(i, k);
    }
  }
}

void HandModel::validate() const {
  if (root_link_ != palm_link_) {
    throw InvariantViolation("kinematic tree: root link must be the palm");
  }
  for (const Joint& jt : joints_) {
    if (!(jt.lower < jt.upper)) {
      throw InvariantViolation("joint '" + jt.name + "': lower limit must be < upper limit");
    }
  }
  auto check_candidates = [&](const std::vector<ContactCandidate>& cs, GraspStyle style) {
    for (const ContactCandidate& c : cs) {
      if (std::abs(c.normal.norm() - 1.0) > 1e-9) {
        throw InvariantViolation(std::string("contact candidate normal must be unit length (") +
                                 to_string(style) + " on '" + links_[c.link].name + "')");
      }
      const int fi = finger_of_link_[c.link];
      const std::string fname = fi >= 0 ? fingers_[fi].name : "palm";
      if (style == GraspStyle::kPinch) {
        if (fname != "thumb" && fname != "index" && fname != "middle") {
          throw InvariantViolation("pinch contact candidates must lie on thumb/index/middle links, "
                                   "found one on '" + links_[c.link].name + "'");
        }
      } else {
        if (fname != "ring" && fname != "palm") {
          throw InvariantViolation("side contact candidates must lie on ring-finger or palm links, "
                                   "found one on '" + links_[c.link].name + "'");
        }
      }
    }
  };
  check_candidates(pinch_candidates_, GraspStyle::kPinch);
  check_candidates(side_candidates_, GraspStyle::kSide);

  // Finger groups partition the joint set.
  std::vector<int> owner(dof(), -1);
  for (int fi = 0; fi < static_cast<int>(fingers_.size()); ++fi) {
    for (int ji : fingers_[fi].joints) {
      if (owner[ji] != -1) {
        throw InvariantViolation("joint '" + joints_[ji].name + "' belongs to two fingers");
      }
      owner[ji] = fi;
    }
  }
  for (int ji = 0; ji < dof(); ++ji) {
    if (owner[ji] == -1) {
      throw InvariantViolation("joint '" + joints_[ji].name + "' belongs to no finger group");
    }
  }
}

JointVector HandModel::mid_range() const {
  JointVector theta(dof());
  for (int i = 0; i < dof(); ++i) theta[i] = 0.5 * (joints_[i].lower + joints_[i].upper);
  return theta;
}

JointVector HandModel::clamp_to_limits(const JointVector& theta) const {
  check_dof(*this, theta);
  JointVector out = theta;
  for (int i = 0; i < dof(); ++i) {
    out[i] = std::min(std::max(out[i], joints_[i].lower), joints_[i].upper);
  }
  return out;
}

std::vector<Pose> HandModel::forward_kinematics(const JointVector& theta) const {
  check_dof(*this, theta);
  std::vector<Pose> poses(num_links());
  poses[root_link_] = Pose::identity();
  for (int ji : topo_joints_) {
    const Joint& jt = joints_[ji];
    Pose local = jt.origin;
    local.rotation = local.rotation * rotation_exp(jt.axis * theta[ji]);
    poses[jt.child_link] = poses[jt.parent_link].compose(local);
  }
  return poses;
}

Matrix3Xd HandModel::point_jacobian(const std::vector<Pose>& poses, int link,
                                    const Vec3& local_point) const {
  Matrix3Xd jac = Matrix3Xd::Zero(3, dof());
  const Vec3 p_world = poses[link].apply(local_point);
  for (int ji : ancestor_joints_[link]) {
    const Joint& jt = joints_[ji];
    const Pose& child = poses[jt.child_link];
    const Vec3 axis_world = child.rotation * jt.axis;
    jac.col(ji) = axis_world.cross(p_world - child.translation);
  }
  return jac;
}

Matrix3Xd HandModel::contact_point_jacobian(const JointVector& theta, GraspStyle style,
                                            int candidate) const {
  const auto& cands = candidates(style);
  if (candidate < 0 || candidate >= static_cast<int>(cands.size())) {
    throw std::invalid_argument("unknown contact candidate id " + std::to_string(candidate) +
                                " for style " + to_string(style));
  }
  const auto poses = forward_kinematics(theta);
  return point_jacobian(poses, cands[candidate].link, cands[candidate].point);
}

void HandModel::accumulate_point_gradient(const std::vector<Pose>& poses, int link,
                                          const Vec3& world_point, const Vec3& g,
                                          Eigen::Ref<Eigen::VectorXd> grad) const {
  for (int ji : ancestor_joints_[link]) {
    const Joint& jt = joints_[ji];
    const Pose& child = poses[jt.child_link];
    const Vec3 axis_world = child.rotation * jt.axis;
    grad[ji] += g.dot(axis_world.cross(world_point - child.translation));
  }
}

void check_dof(const HandModel& model, const JointVector& theta) {
  if (theta.size() != model.dof()) {
    throw std::invalid_argument("joint vector has dimension " + std::to_string(theta.size()) +
                                ", hand has " + std::to_string(model.dof()) + " DOF");
  }
}

}  // namespace seqgrasp
