#include "seqgrasp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/hash.hpp"
#include "seqgrasp/random.hpp"

namespace seqgrasp {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

SdfEval sdf_sphere(const SphereShape& s, const Vec3& p) {
  SdfEval e;
  const double r = p.norm();
  if (r < 1e-12) {
    e.value = -s.radius;
    e.gradient = Vec3::UnitX();  // center: direction undefined
    return e;
  }
  e.value = r - s.radius;
  e.gradient = p / r;
  e.normal_jacobian = (Mat3::Identity() - e.gradient * e.gradient.transpose()) / r;
  return e;
}

SdfEval sdf_box(const BoxShape& b, const Vec3& p) {
  SdfEval e;
  const Vec3 q = p.cwiseAbs() - b.half_extents;
  if ((q.array() > 0).any()) {
    // Outside: vector to the clamped point, smooth off the surface.
    Vec3 w;
    Vec3 active;
    for (int i = 0; i < 3; ++i) {
      if (q[i] > 0) {
        w[i] = p[i] - (p[i] > 0 ? b.half_extents[i] : -b.half_extents[i]);
        active[i] = 1.0;
      } else {
        w[i] = 0.0;
        active[i] = 0.0;
      }
    }
    const double d = w.norm();
    e.value = d;
    e.gradient = w / d;
    e.normal_jacobian =
        (Mat3::Identity() - e.gradient * e.gradient.transpose()) / d * active.asDiagonal();
    return e;
  }
  // Inside: distance to the nearest face.
  int imax = 0;
  q.maxCoeff(&imax);
  e.value = q[imax];
  e.gradient = Vec3::Zero();
  e.gradient[imax] = p[imax] >= 0 ? 1.0 : -1.0;
  return e;
}

SdfEval sdf_cylinder(const CylinderShape& c, const Vec3& p) {
  SdfEval e;
  const double hh = 0.5 * c.height;
  const double rho = std::hypot(p.x(), p.y());
  const double dxy = rho - c.radius;
  const double dz = std::abs(p.z()) - hh;
  const double sz = p.z() >= 0 ? 1.0 : -1.0;

  Eigen::Vector2d u2(1.0, 0.0);
  if (rho > 1e-12) u2 = Eigen::Vector2d(p.x() / rho, p.y() / rho);

  auto radial = [&]() {
    e.gradient = Vec3(u2.x(), u2.y(), 0.0);
    if (rho > 1e-12) {
      Eigen::Matrix2d j2 = (Eigen::Matrix2d::Identity() - u2 * u2.transpose()) / rho;
      e.normal_jacobian.topLeftCorner<2, 2>() = j2;
    }
  };

  if (dxy <= 0 && dz <= 0) {
    if (dxy > dz) {
      e.value = dxy;
      radial();
    } else {
      e.value = dz;
      e.gradient = Vec3(0, 0, sz);
    }
  } else if (dxy > 0 && dz <= 0) {
    e.value = dxy;
    radial();
  } else if (dxy <= 0 && dz > 0) {
    e.value = dz;
    e.gradient = Vec3(0, 0, sz);
  } else {
    // Rim region: distance to the cap edge circle.
    Vec3 w(p.x() - c.radius * u2.x(), p.y() - c.radius * u2.y(), p.z() - sz * hh);
    const double d = w.norm();
    e.value = d;
    e.gradient = w / d;
    Mat3 dw = Mat3::Identity();
    if (rho > 1e-12) {
      dw.topLeftCorner<2, 2>() -=
          c.radius * (Eigen::Matrix2d::Identity() - u2 * u2.transpose()) / rho;
    }
    e.normal_jacobian = (Mat3::Identity() - e.gradient * e.gradient.transpose()) / d * dw;
  }
  return e;
}

SdfEval sdf_capsule(const CapsuleShape& c, const Vec3& p) {
  SdfEval e;
  const double hh = 0.5 * c.height;
  const double zc = std::clamp(p.z(), -hh, hh);
  Vec3 w(p.x(), p.y(), p.z() - zc);
  const double d = w.norm();
  if (d < 1e-12) {
    e.value = -c.radius;
    e.gradient = Vec3::UnitX();
    return e;
  }
  e.value = d - c.radius;
  e.gradient = w / d;
  Vec3 active(1.0, 1.0, std::abs(p.z()) > hh ? 1.0 : 0.0);
  e.normal_jacobian =
      (Mat3::Identity() - e.gradient * e.gradient.transpose()) / d * active.asDiagonal();
  return e;
}

SdfEval sdf_point_mesh(const PointMeshShape& m, const Vec3& p) {
  SdfEval e;
  double best = std::numeric_limits<double>::max();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    const double d2 = (p - m.points[i]).squaredNorm();
    if (d2 < best) {
      best = d2;
      best_i = i;
    }
  }
  e.gradient = m.normals[best_i];
  e.value = (p - m.points[best_i]).dot(e.gradient);
  return e;  // piecewise planar: zero normal jacobian
}

double shape_volume(const Shape& shape) {
  struct V {
    double operator()(const SphereShape& s) const {
      return 4.0 / 3.0 * M_PI * s.radius * s.radius * s.radius;
    }
    double operator()(const BoxShape& b) const {
      return 8.0 * b.half_extents.x() * b.half_extents.y() * b.half_extents.z();
    }
    double operator()(const CylinderShape& c) const {
      return M_PI * c.radius * c.radius * c.height;
    }
    double operator()(const CapsuleShape& c) const {
      return M_PI * c.radius * c.radius * c.height +
             4.0 / 3.0 * M_PI * c.radius * c.radius * c.radius;
    }
    double operator()(const PointMeshShape& m) const {
      // Divergence-theorem estimate from area-uniform samples: V = A/3 * mean(q.n).
      // The total area is unknown, so fall back to the convex-support estimate
      // using the sample bounding radius; adequate for mass scales here.
      double mean_qn = 0.0;
      double rmax = 0.0;
      for (std::size_t i = 0; i < m.points.size(); ++i) {
        mean_qn += m.points[i].dot(m.normals[i]);
        rmax = std::max(rmax, m.points[i].norm());
      }
      if (m.points.empty()) return 0.0;
      mean_qn /= static_cast<double>(m.points.size());
      const double area_bound = 4.0 * M_PI * rmax * rmax;
      return std::max(mean_qn * area_bound / 3.0 * 0.5, 1e-9);
    }
  };
  return std::visit(V{}, shape);
}

}  // namespace

double ObjectModel::volume() const { return shape_volume(shape); }

double ObjectModel::bounding_radius() const {
  struct R {
    double operator()(const SphereShape& s) const { return s.radius; }
    double operator()(const BoxShape& b) const { return b.half_extents.norm(); }
    double operator()(const CylinderShape& c) const {
      return std::hypot(c.radius, 0.5 * c.height);
    }
    double operator()(const CapsuleShape& c) const { return 0.5 * c.height + c.radius; }
    double operator()(const PointMeshShape& m) const {
      double r = 0.0;
      for (const auto& p : m.points) r = std::max(r, p.norm());
      return r;
    }
  };
  return std::visit(R{}, shape);
}

double ObjectModel::horizontal_extent() const {
  double r = 0.0;
  for (const auto& p : surface_samples.points) {
    const Vec3 w = canonical_pose.rotation * p;
    r = std::max(r, std::hypot(w.x(), w.y()));
  }
  return r;
}

SdfEval sdf(const ObjectModel& object, const Vec3& p) {
  return std::visit(
      [&p](const auto& sh) -> SdfEval {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, SphereShape>) {
          return sdf_sphere(sh, p);
        } else if constexpr (std::is_same_v<T, BoxShape>) {
          return sdf_box(sh, p);
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          return sdf_cylinder(sh, p);
        } else if constexpr (std::is_same_v<T, CapsuleShape>) {
          return sdf_capsule(sh, p);
        } else {
          return sdf_point_mesh(sh, p);
        }
      },
      object.shape);
}

SdfEval sdf_world(const ObjectModel& object, const Pose& world_pose, const Vec3& p_world) {
  SdfEval e = sdf(object, world_pose.inverse().apply(p_world));
  e.gradient = world_pose.rotation * e.gradient;
  e.normal_jacobian = world_pose.rotation * e.normal_jacobian * world_pose.rotation.transpose();
  return e;
}

SurfaceSamples sample_surface(const ObjectModel& object, int n, std::uint64_t seed) {
  SurfaceSamples out;
  out.points.reserve(n);
  out.normals.reserve(n);
  RandomStream rng(RandomStream::splitmix64(seed ^ 0x5eedfacell));

  auto push = [&](const Vec3& p, const Vec3& nrm) {
    out.points.push_back(p);
    out.normals.push_back(nrm);
  };

  struct Sampler {
    RandomStream& rng;
    int n;
    decltype(push)& emit;

    void operator()(const SphereShape& s) {
      for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * rng.uniform();
        const double phi = kTwoPi * rng.uniform();
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        Vec3 dir(r * std::cos(phi), r * std::sin(phi), z);
        emit(s.radius * dir, dir);
      }
    }
    void operator()(const BoxShape& b) {
      const Vec3& h = b.half_extents;
      const double areas[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
      const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
      for (int i = 0; i < n; ++i) {
        double pick = rng.uniform() * total;
        int axis = 0;
        double sign = 1.0;
        for (int a = 0; a < 3; ++a) {
          for (double s : {1.0, -1.0}) {
            if (pick < areas[a]) {
              axis = a;
              sign = s;
              goto chosen;
            }
            pick -= areas[a];
          }
        }
      chosen:
        Vec3 p;
        p[axis] = sign * h[axis];
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        p[u] = rng.uniform(-h[u], h[u]);
        p[v] = rng.uniform(-h[v], h[v]);
        Vec3 nrm = Vec3::Zero();
        nrm[axis] = sign;
        emit(p, nrm);
      }
    }
    void operator()(const CylinderShape& c) {
      const double hh = 0.5 * c.height;
      const double side = kTwoPi * c.radius * c.height;
      const double cap = M_PI * c.radius * c.radius;
      const double total = side + 2.0 * cap;
      for (int i = 0; i < n; ++i) {
        const double pick = rng.uniform() * total;
        const double phi = kTwoPi * rng.uniform();
        if (pick < side) {
          const double z = rng.uniform(-hh, hh);
          Vec3 nrm(std::cos(phi), std::sin(phi), 0.0);
          emit(Vec3(c.radius * nrm.x(), c.radius * nrm.y(), z), nrm);
        } else {
          const double sign = pick < side + cap ? 1.0 : -1.0;
          const double r = c.radius * std::sqrt(rng.uniform());
          emit(Vec3(r * std::cos(phi), r * std::sin(phi), sign * hh), Vec3(0, 0, sign));
        }
      }
    }
    void operator()(const CapsuleShape& c) {
      const double hh = 0.5 * c.height;
      const double side = kTwoPi * c.radius * c.height;
      const double caps = 4.0 * M_PI * c.radius * c.radius;
      const double total = side + caps;
      for (int i = 0; i < n; ++i) {
        const double pick = rng.uniform() * total;
        const double phi = kTwoPi * rng.uniform();
        if (pick < side) {
          const double z = rng.uniform(-hh, hh);
          Vec3 nrm(std::cos(phi), std::sin(phi), 0.0);
          emit(Vec3(c.radius * nrm.x(), c.radius * nrm.y(), z), nrm);
        } else {
          const double z = 1.0 - 2.0 * rng.uniform();
          const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
          Vec3 dir(r * std::cos(phi), r * std::sin(phi), z);
          const double offset = z >= 0 ? hh : -hh;
          emit(Vec3(c.radius * dir.x(), c.radius * dir.y(), offset + c.radius * dir.z()), dir);
        }
      }
    }
    void operator()(const PointMeshShape& m) {
      for (int i = 0; i < n; ++i) {
        const auto k = rng.uniform_index(m.points.size());
        emit(m.points[k], m.normals[k]);
      }
    }
  } sampler{rng, n, push};
  std::visit(sampler, object.shape);
  return out;
}

ObjectLibrary ObjectLibrary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("object library file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

ObjectLibrary ObjectLibrary::from_json_text(const std::string& text,
                                            const std::string& origin_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin_name + ": " + e.what());
  }
  ObjectLibrary lib;
  lib.content_hash = fnv1a64(text);
  if (!j.contains("objects") || !j["objects"].is_array()) {
    throw ParseError(origin_name + ": missing 'objects' array");
  }
  for (const auto& jo : j["objects"]) {
    ObjectModel obj;
    obj.id = jo.value("id", "");
    if (obj.id.empty()) throw ParseError(origin_name + ": object without id");
    const std::string ctx = "object '" + obj.id + "'";
    if (!jo.contains("shape")) throw ParseError(ctx + ": missing shape");
    const json& js = jo["shape"];
    const std::string type = js.value("type", "");
    if (type == "sphere") {
      obj.shape = SphereShape{js.at("radius").get<double>()};
    } else if (type == "box") {
      const auto& h = js.at("half_extents");
      obj.shape = BoxShape{Vec3(h[0].get<double>(), h[1].get<double>(), h[2].get<double>())};
    } else if (type == "cylinder") {
      obj.shape = CylinderShape{js.at("radius").get<double>(), js.at("height").get<double>()};
    } else if (type == "capsule") {
      obj.shape = CapsuleShape{js.at("radius").get<double>(), js.at("height").get<double>()};
    } else if (type == "point_mesh") {
      PointMeshShape m;
      for (const auto& jp : js.at("points")) {
        m.points.emplace_back(jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>());
      }
      for (const auto& jn : js.at("normals")) {
        Vec3 nr(jn[0].get<double>(), jn[1].get<double>(), jn[2].get<double>());
        const double len = nr.norm();
        if (len < 1e-12) throw ParseError(ctx + ": zero-length mesh normal");
        m.normals.push_back(nr / len);
      }
      if (m.points.empty() || m.points.size() != m.normals.size()) {
        throw ParseError(ctx + ": point_mesh needs matching non-empty points/normals");
      }
      obj.shape = std::move(m);
    } else {
      throw ParseError(ctx + ": unknown shape type '" + type + "'");
    }
    obj.density = jo.value("density", 500.0);
    if (obj.density <= 0) throw InvariantViolation(ctx + ": density must be > 0");
    if (jo.contains("canonical_pose")) {
      const json& jp = jo["canonical_pose"];
      const auto& xyz = jp.at("xyz");
      obj.canonical_pose.translation =
          Vec3(xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>());
      const auto& rpy = jp.at("rpy");
      obj.canonical_pose.rotation =
          rpy_to_rotation(rpy[0].get<double>(), rpy[1].get<double>(), rpy[2].get<double>());
    }
    const int n_samples = jo.value("surface_samples", 256);
    const std::uint64_t sample_seed = jo.value("sample_seed", 1234u);
    obj.surface_samples = sample_surface(obj, n_samples, sample_seed);
    lib.objects.push_back(std::move(obj));
  }
  return lib;
}

const ObjectModel& ObjectLibrary::find(const std::string& id) const {
  for (const auto& obj : objects) {
    if (obj.id == id) return obj;
  }
  throw DataError("unknown object id '" + id + "'");
}

}  // namespace seqgrasp
