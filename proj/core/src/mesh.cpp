#include "touchsplat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <utility>

namespace touchsplat {

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) box.expand(v);
  return box;
}

double TriangleMesh::area() const {
  double total = 0.0;
  for (const auto& t : triangles) {
    const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    total += 0.5 * e1.cross(e2).norm();
  }
  return total;
}

void TriangleMesh::finalize(double albedo) {
  face_normals.resize(triangles.size());
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i];
    const Vec3 n = (vertices[t[1]] - vertices[t[0]])
                       .cross(vertices[t[2]] - vertices[t[0]]);
    face_normals[i] = n.normalized();
  }
  if (face_albedo.size() != triangles.size())
    face_albedo.assign(triangles.size(), albedo);
}

namespace {

using EdgeCount = std::map<std::pair<std::uint32_t, std::uint32_t>, int>;

EdgeCount edge_incidence(const TriangleMesh& mesh) {
  EdgeCount counts;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = t[e], b = t[(e + 1) % 3];
      counts[{std::min(a, b), std::max(a, b)}] += 1;
    }
  return counts;
}

}  // namespace

bool edge_manifold(const TriangleMesh& mesh) {
  for (const auto& [edge, count] : edge_incidence(mesh))
    if (count > 2) return false;
  return true;
}

bool watertight(const TriangleMesh& mesh) {
  for (const auto& [edge, count] : edge_incidence(mesh))
    if (count != 2) return false;
  return true;
}

namespace {

struct Builder {
  TriangleMesh mesh;

  std::uint32_t vertex(const Vec3& p) {
    mesh.vertices.push_back(p);
    return std::uint32_t(mesh.vertices.size() - 1);
  }
  void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c, double albedo) {
    mesh.triangles.push_back({a, b, c});
    mesh.face_albedo.push_back(albedo);
  }
  void quad(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d,
            double albedo) {
    tri(a, b, c, albedo);
    tri(a, c, d, albedo);
  }
};

TriangleMesh make_cube() {
  Builder b;
  for (int i = 0; i < 8; ++i)
    b.vertex({i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5});
  // One albedo per face gives the renders visible texture.
  b.quad(0, 2, 3, 1, 0.55);  // -z
  b.quad(4, 5, 7, 6, 0.95);  // +z
  b.quad(0, 1, 5, 4, 0.70);  // -y
  b.quad(2, 6, 7, 3, 0.85);  // +y
  b.quad(0, 4, 6, 2, 0.62);  // -x
  b.quad(1, 3, 7, 5, 0.78);  // +x
  b.mesh.finalize();
  return b.mesh;
}

// Surface of revolution around z: rings at (z, radius) pairs, closed by
// cap fans. `checker` varies side albedo for visual texture.
void lathe(Builder& b, const std::vector<std::pair<double, double>>& profile,
           int segments, bool bottom_cap, bool top_cap) {
  std::vector<std::vector<std::uint32_t>> rings;
  for (const auto& [z, r] : profile) {
    std::vector<std::uint32_t> ring(segments);
    for (int j = 0; j < segments; ++j) {
      const double th = 2.0 * M_PI * j / segments;
      ring[j] = b.vertex({r * std::cos(th), r * std::sin(th), z});
    }
    rings.push_back(std::move(ring));
  }
  for (std::size_t i = 0; i + 1 < rings.size(); ++i)
    for (int j = 0; j < segments; ++j) {
      const int jn = (j + 1) % segments;
      const double albedo = 0.5 + 0.3 * ((i + j) % 2);
      b.quad(rings[i][j], rings[i][jn], rings[i + 1][jn], rings[i + 1][j],
             albedo);
    }
  if (bottom_cap) {
    const auto c = b.vertex({0.0, 0.0, profile.front().first});
    for (int j = 0; j < segments; ++j)
      b.tri(c, rings.front()[(j + 1) % segments], rings.front()[j], 0.6);
  }
  if (top_cap) {
    const auto c = b.vertex({0.0, 0.0, profile.back().first});
    for (int j = 0; j < segments; ++j)
      b.tri(c, rings.back()[j], rings.back()[(j + 1) % segments], 0.8);
  }
}

TriangleMesh make_can() {
  Builder b;
  // Four shallow circumferential ridges on a 0.32 m cylinder.
  std::vector<std::pair<double, double>> profile{{-0.5, 0.32}};
  for (const double c : {-0.3, -0.1, 0.1, 0.3}) {
    profile.emplace_back(c - 0.04, 0.32);
    profile.emplace_back(c, 0.35);
    profile.emplace_back(c + 0.04, 0.32);
  }
  profile.emplace_back(0.5, 0.32);
  lathe(b, profile, 40, true, true);
  b.mesh.finalize();
  return b.mesh;
}

void add_uv_sphere(Builder& b, const Vec3& center, double radius, int lat,
                   int lon, double albedo) {
  std::vector<std::vector<std::uint32_t>> rings;
  for (int i = 1; i < lat; ++i) {
    const double phi = M_PI * i / lat;  // 0 = +z pole
    std::vector<std::uint32_t> ring(lon);
    for (int j = 0; j < lon; ++j) {
      const double th = 2.0 * M_PI * j / lon;
      ring[j] = b.vertex(center + radius * Vec3(std::sin(phi) * std::cos(th),
                                                std::sin(phi) * std::sin(th),
                                                std::cos(phi)));
    }
    rings.push_back(std::move(ring));
  }
  const auto top = b.vertex(center + Vec3(0, 0, radius));
  const auto bot = b.vertex(center - Vec3(0, 0, radius));
  for (int j = 0; j < lon; ++j) {
    const int jn = (j + 1) % lon;
    b.tri(top, rings.front()[j], rings.front()[jn], albedo);
    b.tri(bot, rings.back()[jn], rings.back()[j], albedo);
  }
  for (std::size_t i = 0; i + 1 < rings.size(); ++i)
    for (int j = 0; j < lon; ++j) {
      const int jn = (j + 1) % lon;
      b.quad(rings[i][j], rings[i][jn], rings[i + 1][jn], rings[i + 1][j],
             albedo);
    }
}

TriangleMesh make_hydrant() {
  Builder b;
  // Body: cylinder up to z = 0.25 closed by a hemispherical cap.
  std::vector<std::pair<double, double>> profile{
      {-0.5, 0.25}, {-0.25, 0.25}, {0.0, 0.25}, {0.25, 0.25}};
  const int cap_steps = 5;
  for (int i = 1; i < cap_steps; ++i) {
    const double phi = 0.5 * M_PI * i / cap_steps;
    profile.emplace_back(0.25 + 0.25 * std::sin(phi), 0.25 * std::cos(phi));
  }
  lathe(b, profile, 36, true, true);
  // Six bolts protruding from the equator band.
  for (int k = 0; k < 6; ++k) {
    const double th = 2.0 * M_PI * k / 6;
    add_uv_sphere(b, {0.27 * std::cos(th), 0.27 * std::sin(th), 0.0}, 0.06, 6,
                  12, 0.4);
  }
  b.mesh.finalize();
  return b.mesh;
}

}  // namespace

TriangleMesh builtin_object(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::Cube: return make_cube();
    case ObjectKind::Can: return make_can();
    case ObjectKind::Hydrant: return make_hydrant();
  }
  return make_cube();
}

GroundTruth sample_surface(const TriangleMesh& mesh, std::size_t n,
                           std::uint64_t seed) {
  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    total += 0.5 * e1.cross(e2).norm();
    cum[i] = total;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  GroundTruth gt;
  gt.points.reserve(n);
  gt.normals.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double pick = uni(rng) * total;
    const std::size_t f =
        std::min(std::size_t(std::lower_bound(cum.begin(), cum.end(), pick) -
                             cum.begin()),
                 cum.size() - 1);
    const auto& t = mesh.triangles[f];
    // Square-root warp gives a uniform distribution over the triangle.
    const double r1 = std::sqrt(uni(rng)), r2 = uni(rng);
    const Vec3 p = (1.0 - r1) * mesh.vertices[t[0]] +
                   r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                   r1 * r2 * mesh.vertices[t[2]];
    gt.points.push_back(p);
    gt.normals.push_back(mesh.face_normals[f]);
  }
  return gt;
}

}  // namespace touchsplat
