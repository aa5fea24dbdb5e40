#include "touchsplat/marching.hpp"

#include "touchsplat/errors.hpp"
#include "touchsplat/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace touchsplat {

namespace {

// Cube corner c = x + 2y + 4z. The six tetrahedra share the 0-7
// diagonal; face diagonals agree between neighboring cells, so the
// extracted surface has no cracks.
constexpr std::array<std::array<int, 4>, 6> kTets = {{{0, 5, 1, 7},
                                                      {0, 1, 3, 7},
                                                      {0, 3, 2, 7},
                                                      {0, 2, 6, 7},
                                                      {0, 6, 4, 7},
                                                      {0, 4, 5, 7}}};

struct GridShape {
  Vec3 origin;
  Vec3 step;   // per-axis node spacing
  int nodes;   // nodes per axis

  Vec3 position(int ix, int iy, int iz) const {
    return origin + Vec3(ix * step.x(), iy * step.y(), iz * step.z());
  }
  std::int64_t id(int ix, int iy, int iz) const {
    return (std::int64_t(ix) * nodes + iy) * nodes + iz;
  }
};

}  // namespace

TriangleMesh build_proxy_mesh(const std::vector<GaussianPrimitive>& gaussians,
                              int grid_resolution) {
  if (gaussians.empty()) throw EmptyModel("build_proxy_mesh: no gaussians");
  const int res = std::max(2, grid_resolution);

  Aabb box;
  for (const GaussianPrimitive& g : gaussians) {
    const double r = 3.0 * g.scales.maxCoeff();
    box.expand(g.mu + Vec3::Constant(r));
    box.expand(g.mu - Vec3::Constant(r));
  }

  GridShape grid;
  grid.nodes = res + 1;
  grid.origin = box.lo;
  grid.step = (box.hi - box.lo) / double(res);

  // Accumulate density per gaussian over the nodes inside its own
  // 3-sigma box; contributions outside are below exp(-4.5) of the peak
  // and irrelevant to a 0.5-of-max iso-level.
  std::vector<double> density(std::size_t(grid.nodes) * grid.nodes * grid.nodes,
                              0.0);
  for (const GaussianPrimitive& g : gaussians) {
    const double r = 3.0 * g.scales.maxCoeff();
    const Mat3 m = ellipsoid_matrix(g).m;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(
          0, int(std::floor((g.mu(a) - r - grid.origin(a)) / grid.step(a))));
      hi[a] = std::min(
          res, int(std::ceil((g.mu(a) + r - grid.origin(a)) / grid.step(a))));
    }
    for (int ix = lo[0]; ix <= hi[0]; ++ix)
      for (int iy = lo[1]; iy <= hi[1]; ++iy)
        for (int iz = lo[2]; iz <= hi[2]; ++iz) {
          const Vec3 d = grid.position(ix, iy, iz) - g.mu;
          density[std::size_t(grid.id(ix, iy, iz))] +=
              g.opacity * std::exp(-0.5 * d.dot(m * d));
        }
  }

  // The iso-level is half the typical on-surface density, taken as the
  // median of the field sampled (trilinearly) at the primitive centers.
  // Half the *maximum* would track the densest clump instead, condemning
  // every single-layer region to read as a permanent hole. For a lone
  // primitive the two definitions coincide.
  auto sample = [&](const Vec3& p) -> double {
    const Vec3 rel = (p - grid.origin).cwiseQuotient(grid.step);
    int c[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
      const double clamped = std::clamp(rel(a), 0.0, double(res) - 1e-9);
      c[a] = int(clamped);
      f[a] = clamped - c[a];
    }
    double v = 0.0;
    for (int dx = 0; dx < 2; ++dx)
      for (int dy = 0; dy < 2; ++dy)
        for (int dz = 0; dz < 2; ++dz)
          v += (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) *
               (dz ? f[2] : 1 - f[2]) *
               density[std::size_t(grid.id(c[0] + dx, c[1] + dy, c[2] + dz))];
    return v;
  };
  std::vector<double> at_centers;
  at_centers.reserve(gaussians.size());
  for (const GaussianPrimitive& g : gaussians) at_centers.push_back(sample(g.mu));
  std::nth_element(at_centers.begin(),
                   at_centers.begin() + std::ptrdiff_t(at_centers.size() / 2),
                   at_centers.end());
  const double iso = 0.5 * at_centers[at_centers.size() / 2];

  TriangleMesh mesh;
  // Edge (node a, node b) with a < b owns one welded surface vertex.
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  edge_vertex.reserve(4096);

  auto weld = [&](std::int64_t na, std::int64_t nb, const Vec3& pa,
                  const Vec3& pb, double va, double vb) -> std::uint32_t {
    const Vec3* p0 = &pa;
    const Vec3* p1 = &pb;
    double v0 = va, v1 = vb;
    if (na > nb) {
      std::swap(na, nb);
      std::swap(p0, p1);
      std::swap(v0, v1);
    }
    const std::uint64_t key =
        (std::uint64_t(na) << 32) | std::uint64_t(std::uint32_t(nb));
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double t = (iso - v0) / (v1 - v0);
    const std::uint32_t id = std::uint32_t(mesh.vertices.size());
    mesh.vertices.push_back(*p0 + t * (*p1 - *p0));
    edge_vertex.emplace(key, id);
    return id;
  };

  auto emit = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c,
                  const Vec3& field_grad) {
    if (a == b || b == c || a == c) return;
    const Vec3& pa = mesh.vertices[a];
    const Vec3 n = (mesh.vertices[b] - pa).cross(mesh.vertices[c] - pa);
    if (n.squaredNorm() < 1e-24) return;
    // Outward means against the density gradient (density decreases
    // leaving the body).
    if (n.dot(field_grad) > 0.0) std::swap(b, c);
    mesh.triangles.push_back({a, b, c});
  };

  std::array<Vec3, 8> pos;
  std::array<double, 8> val;
  std::array<std::int64_t, 8> nid;

  for (int ix = 0; ix < res; ++ix)
    for (int iy = 0; iy < res; ++iy)
      for (int iz = 0; iz < res; ++iz) {
        for (int c = 0; c < 8; ++c) {
          const int cx = ix + (c & 1), cy = iy + ((c >> 1) & 1),
                    cz = iz + ((c >> 2) & 1);
          pos[c] = grid.position(cx, cy, cz);
          val[c] = density[std::size_t(grid.id(cx, cy, cz))];
          nid[c] = grid.id(cx, cy, cz);
        }

        for (const auto& tet : kTets) {
          int inside_mask = 0;
          for (int k = 0; k < 4; ++k)
            if (val[tet[k]] >= iso) inside_mask |= 1 << k;
          if (inside_mask == 0 || inside_mask == 0xf) continue;

          // Linear field gradient over the tetrahedron.
          Mat3 em;
          Vec3 dv;
          for (int k = 0; k < 3; ++k) {
            em.row(k) = (pos[tet[k + 1]] - pos[tet[0]]).transpose();
            dv(k) = val[tet[k + 1]] - val[tet[0]];
          }
          const Vec3 grad = em.fullPivLu().solve(dv);

          auto edge = [&](int a, int b) {
            return weld(nid[tet[a]], nid[tet[b]], pos[tet[a]], pos[tet[b]],
                        val[tet[a]], val[tet[b]]);
          };

          // Count of inside corners decides the patch shape.
          int inside[4], outside[4], ni = 0, no = 0;
          for (int k = 0; k < 4; ++k)
            (val[tet[k]] >= iso ? inside[ni++] : outside[no++]) = k;

          if (ni == 1) {
            emit(edge(inside[0], outside[0]), edge(inside[0], outside[1]),
                 edge(inside[0], outside[2]), grad);
          } else if (ni == 3) {
            emit(edge(outside[0], inside[0]), edge(outside[0], inside[1]),
                 edge(outside[0], inside[2]), grad);
          } else {  // ni == 2: quad between the two crossing edge pairs
            const std::uint32_t q0 = edge(inside[0], outside[0]);
            const std::uint32_t q1 = edge(inside[0], outside[1]);
            const std::uint32_t q2 = edge(inside[1], outside[1]);
            const std::uint32_t q3 = edge(inside[1], outside[0]);
            emit(q0, q1, q2, grad);
            emit(q0, q2, q3, grad);
          }
        }
      }

  mesh.finalize();
  return mesh;
}

}  // namespace touchsplat
