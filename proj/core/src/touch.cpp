#include "touchsplat/touch.hpp"

#include "touchsplat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

namespace touchsplat {

namespace {

// Upper median: sorted[n/2]. Used consistently for every spacing
// statistic in the touch policy.
double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

std::vector<Vec3> centers_of(const std::vector<GaussianPrimitive>& gaussians) {
  std::vector<Vec3> out(gaussians.size());
  for (std::size_t i = 0; i < gaussians.size(); ++i) out[i] = gaussians[i].mu;
  return out;
}

}  // namespace

std::vector<double> nn_gap(const std::vector<GaussianPrimitive>& gaussians) {
  if (gaussians.size() < 2)
    throw TooFewPrimitives("nn_gap: need at least 2 primitives");
  const SpatialIndex index(centers_of(gaussians));
  std::vector<double> out(gaussians.size(), 0.0);
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    // Two hits: the first non-self one is the nearest other center
    // (with duplicate centers the self match may rank second).
    const auto hits = index.nearest(gaussians[i].mu, 2);
    out[i] = hits[0].index == i ? hits[1].distance : hits[0].distance;
  }
  return out;
}

std::vector<Vec3> select_sparse_centers(
    const std::vector<GaussianPrimitive>& gaussians, std::size_t count) {
  if (count < 1 || count > gaussians.size())
    throw InsufficientPrimitives(
        "select_sparse_centers: count outside [1, primitive count]");
  const std::vector<double> gaps = nn_gap(gaussians);
  const double median = median_of(gaps);
  const double min_sep = 2.0 * median;

  std::vector<std::size_t> order(gaussians.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gaps[a] > gaps[b] || (gaps[a] == gaps[b] && a < b);
  });

  std::vector<Vec3> selected;
  std::vector<std::size_t> skipped;
  for (const std::size_t i : order) {
    if (selected.size() == count) break;
    const Vec3& c = gaussians[i].mu;
    const bool clear = std::none_of(
        selected.begin(), selected.end(),
        [&](const Vec3& s) { return (s - c).norm() <= min_sep; });
    if (clear)
      selected.push_back(c);
    else
      skipped.push_back(i);
  }
  // Separation rule exhausted the candidates: fill from the sparsest
  // skipped ones so the caller always gets `count` probe sites.
  for (std::size_t k = 0; selected.size() < count; ++k)
    selected.push_back(gaussians[skipped[k]].mu);
  return selected;
}

TouchPatch acquire_patch(const GroundTruth& gt, const SpatialIndex& index,
                         const Vec3& center, std::size_t k) {
  if (gt.points.size() < k)
    throw InsufficientGroundTruth("acquire_patch: fewer samples than k");
  TouchPatch patch;
  patch.center = center;
  patch.points.reserve(k);
  patch.normals.reserve(k);
  for (const auto& hit : index.nearest(center, k)) {
    patch.points.push_back(gt.points[hit.index]);
    patch.normals.push_back(gt.normals[hit.index]);
  }
  return patch;
}

BoundarySet extract_boundary(const TriangleMesh& mesh,
                             double max_normal_angle_deg) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_count;
  std::map<std::uint32_t, std::vector<std::size_t>> vertex_faces;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = t[e], b = t[(e + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}] += 1;
      vertex_faces[t[e]].push_back(f);
    }
  }

  BoundarySet out;
  for (const auto& [edge, count] : edge_count) {
    if (count == 1)
      out.points.push_back(
          0.5 * (mesh.vertices[edge.first] + mesh.vertices[edge.second]));
  }
  // Vertices whose incident faces disagree beyond the angle limit mark
  // folded surface artifacts. Ordinary creases stay below the default
  // limit; a flap bent back past it is geometry worth re-probing.
  const double cos_limit = std::cos(max_normal_angle_deg * M_PI / 180.0);
  for (const auto& [v, faces] : vertex_faces) {
    bool inconsistent = false;
    for (std::size_t a = 0; a < faces.size() && !inconsistent; ++a)
      for (std::size_t b = a + 1; b < faces.size() && !inconsistent; ++b)
        if (mesh.face_normals[faces[a]].dot(mesh.face_normals[faces[b]]) <
            cos_limit)
          inconsistent = true;
    if (inconsistent) out.points.push_back(mesh.vertices[v]);
  }
  out.covered.assign(out.points.size(), false);
  return out;
}

std::vector<Vec3> greedy_cover(BoundarySet& boundary, double radius,
                               std::size_t budget) {
  if (boundary.points.empty())
    throw EmptyBoundary("greedy_cover: empty boundary set");

  std::vector<Vec3> centers;
  const double r2 = radius * radius;
  for (std::size_t pick = 0; pick < budget; ++pick) {
    std::size_t best = 0, best_cover = 0;
    for (std::size_t i = 0; i < boundary.points.size(); ++i) {
      std::size_t cover = 0;
      for (std::size_t j = 0; j < boundary.points.size(); ++j)
        if (!boundary.covered[j] &&
            (boundary.points[j] - boundary.points[i]).squaredNorm() <= r2)
          ++cover;
      if (cover > best_cover) {
        best = i;
        best_cover = cover;
      }
    }
    if (best_cover == 0) break;  // everything already covered
    centers.push_back(boundary.points[best]);
    for (std::size_t j = 0; j < boundary.points.size(); ++j)
      if ((boundary.points[j] - boundary.points[best]).squaredNorm() <= r2)
        boundary.covered[j] = true;
  }
  return centers;
}

double patch_bounding_radius(const TouchPatch& patch) {
  double r = 0.0;
  for (const Vec3& p : patch.points)
    r = std::max(r, (p - patch.center).norm());
  return r;
}

double median_patch_spacing(const TouchPatch& patch) {
  const std::size_t n = patch.points.size();
  if (n < 2) return 0.0;
  std::vector<double> spacing(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::max();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        best = std::min(best, (patch.points[j] - patch.points[i]).norm());
    spacing[i] = best;
  }
  return median_of(std::move(spacing));
}

std::vector<GaussianPrimitive> spawn_touch_gaussians(
    const TouchPatch& patch, const std::vector<GaussianPrimitive>& existing,
    const Vec3& background) {
  std::vector<Vec3> visual_centers, touch_centers;
  std::vector<std::size_t> visual_ids;
  for (std::size_t i = 0; i < existing.size(); ++i) {
    if (existing[i].origin == Origin::Visual) {
      visual_centers.push_back(existing[i].mu);
      visual_ids.push_back(i);
    } else {
      touch_centers.push_back(existing[i].mu);
    }
  }
  const SpatialIndex visual_index(std::move(visual_centers));
  const SpatialIndex touch_index(std::move(touch_centers));

  const double s = median_patch_spacing(patch);
  const double scale = s > 0.0 ? s : 1e-3;

  std::vector<GaussianPrimitive> spawned;
  spawned.reserve(patch.points.size());
  for (std::size_t i = 0; i < patch.points.size(); ++i) {
    const Vec3& p = patch.points[i];
    if (!touch_index.empty() &&
        touch_index.nearest(p, 1).front().distance <= 1e-9)
      continue;

    const Vec3 n = patch.normals[i].normalized();
    // Orthonormal frame with the short (c) axis along the normal.
    const Vec3 ref = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    const Vec3 u = ref.cross(n).normalized();
    const Vec3 v = n.cross(u);
    Mat3 rot;
    rot.col(0) = u;
    rot.col(1) = v;
    rot.col(2) = n;

    GaussianPrimitive g;
    g.mu = p;
    g.rotation = Quat(rot).normalized();
    g.scales = Vec3(scale, scale, scale / 4.0);
    g.opacity = 0.9;
    g.color = visual_index.empty()
                  ? background
                  : existing[visual_ids[visual_index.nearest(p, 1)
                                            .front()
                                            .index]]
                        .color;
    g.locked = true;
    g.origin = Origin::Touch;
    spawned.push_back(g);
  }
  return spawned;
}

std::vector<std::size_t> prune_contradicted(
    std::vector<GaussianPrimitive>& gaussians, const TouchPatch& patch,
    double distance_threshold) {
  if (patch.points.empty()) return {};
  const SpatialIndex contact_index(
      std::vector<Vec3>(patch.points.begin(), patch.points.end()));

  std::vector<std::size_t> removed;
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const GaussianPrimitive& g = gaussians[i];
    if (g.origin != Origin::Visual) continue;
    if ((g.mu - patch.center).norm() > distance_threshold) continue;
    if (contact_index.nearest(g.mu, 1).front().distance >
        distance_threshold / 2.0)
      removed.push_back(i);
  }

  if (!removed.empty()) {
    std::vector<GaussianPrimitive> kept;
    kept.reserve(gaussians.size() - removed.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
      if (r < removed.size() && removed[r] == i) {
        ++r;
        continue;
      }
      kept.push_back(gaussians[i]);
    }
    gaussians = std::move(kept);
  }
  return removed;
}

}  // namespace touchsplat
