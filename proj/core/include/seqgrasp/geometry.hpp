#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "seqgrasp/pose.hpp"

namespace seqgrasp {

struct SphereShape {
  double radius = 0.0;
};
struct BoxShape {
  Vec3 half_extents = Vec3::Zero();
};
struct CylinderShape {
  double radius = 0.0;
  double height = 0.0;  // full height
};
struct CapsuleShape {
  double radius = 0.0;
  double height = 0.0;  // full length of the cylindrical segment
};
/// Convex object given only by surface samples; SDF is the nearest-sample
/// tangent-plane approximation.
struct PointMeshShape {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

using Shape = std::variant<SphereShape, BoxShape, CylinderShape, CapsuleShape, PointMeshShape>;

struct SurfaceSamples {
  std::vector<Vec3> points;   // object frame
  std::vector<Vec3> normals;  // unit, outward
};

struct SdfEval {
  double value = 0.0;            // signed distance [m], negative inside
  Vec3 gradient = Vec3::UnitX();  // unit outward where defined
  Mat3 normal_jacobian = Mat3::Zero();  // d(gradient)/d(point), zero on flats
};

/// Rigid object: analytic (or point-sampled) geometry, inertial properties
/// and the canonical tabletop resting pose. Immutable after construction.
struct ObjectModel {
  std::string id;
  Shape shape;
  double density = 500.0;  // kg/m^3
  Pose canonical_pose;     // object frame in world, resting on the table
  SurfaceSamples surface_samples;

  double mass() const { return density * volume(); }
  double volume() const;
  double bounding_radius() const;
  /// Largest distance from the vertical axis over the shape when placed at
  /// canonical orientation; used to choose lateral standoffs.
  double horizontal_extent() const;
};

/// Exact signed distance for analytic shapes; nearest-sample approximation
/// for point meshes. `p` is in the object frame.
SdfEval sdf(const ObjectModel& object, const Vec3& p);

/// SDF of an object placed at `world_pose`, evaluated at a world point.
SdfEval sdf_world(const ObjectModel& object, const Pose& world_pose, const Vec3& p_world);

/// Deterministic area-weighted surface sampling (object frame).
SurfaceSamples sample_surface(const ObjectModel& object, int n, std::uint64_t seed);

/// Signed distance to the tabletop half-space z >= 0.
inline double table_sdf(const Vec3& p_world) { return p_world.z(); }

/// Object library file: JSON list of objects. Throws ParseError on malformed
/// input, InvariantViolation when an entry violates the documented rules.
struct ObjectLibrary {
  std::vector<ObjectModel> objects;
  std::uint64_t content_hash = 0;

  static ObjectLibrary load(const std::string& path);
  static ObjectLibrary from_json_text(const std::string& text, const std::string& origin_name);
  const ObjectModel& find(const std::string& id) const;  // throws DataError when absent
};

}  // namespace seqgrasp
