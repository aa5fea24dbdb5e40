#pragma once

#include "touchsplat/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace touchsplat {

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  bool intersects(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (hi.array() >= o.lo.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return (hi - lo).norm(); }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> face_normals;    // unit, outward
  std::vector<double> face_albedo;   // scalar reflectance per face

  Aabb bounds() const;
  double area() const;
  /// Recomputes face_normals from vertex winding; fills face_albedo
  /// with `albedo` if it is empty or mis-sized.
  void finalize(double albedo = 0.7);
};

/// True when every edge is shared by at most two triangles.
bool edge_manifold(const TriangleMesh& mesh);

/// True when every edge is shared by exactly two triangles.
bool watertight(const TriangleMesh& mesh);

enum class ObjectKind { Cube, Can, Hydrant };

/// Procedural test objects spanning flat, cylindrical, and compound
/// curvature: a unit box, a ridged closed cylinder, and a capped
/// cylinder with six protruding bolt spheres.
TriangleMesh builtin_object(ObjectKind kind);

struct GroundTruth {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit, per sample
};

/// Area-weighted uniform surface sampling with per-face normals.
/// Deterministic for a fixed seed.
GroundTruth sample_surface(const TriangleMesh& mesh, std::size_t n,
                           std::uint64_t seed);

}  // namespace touchsplat
