#pragma once

#include "touchsplat/kdtree.hpp"
#include "touchsplat/mesh.hpp"
#include "touchsplat/types.hpp"

#include <cstddef>
#include <vector>

namespace touchsplat {

/// Simulated fingertip contact: k surface points with normals around a
/// sampling center.
struct TouchPatch {
  Vec3 center = Vec3::Zero();
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

/// Candidate probe sites harvested from a proxy mesh, with coverage
/// bookkeeping for the greedy pass.
struct BoundarySet {
  std::vector<Vec3> points;
  std::vector<bool> covered;
};

/// Distance from each primitive's center to the nearest other center.
/// Throws TooFewPrimitives below 2 primitives.
std::vector<double> nn_gap(const std::vector<GaussianPrimitive>& gaussians);

/// Centers of the `count` primitives with the largest nearest-neighbor
/// distance, in descending sparsity order. A candidate closer than
/// 2x the median gap to an already selected center is skipped and the
/// next one considered; if that exhausts the list the remaining picks
/// fall back to the sparsest skipped candidates so exactly `count`
/// centers are always returned. Throws InsufficientPrimitives when
/// count exceeds the primitive count (and TooFewPrimitives from the
/// underlying gap computation below 2 primitives).
std::vector<Vec3> select_sparse_centers(
    const std::vector<GaussianPrimitive>& gaussians, std::size_t count);

/// The k ground-truth surface samples nearest to `center`, with their
/// normals. `index` must be built over gt.points. Throws
/// InsufficientGroundTruth when fewer than k samples exist.
TouchPatch acquire_patch(const GroundTruth& gt, const SpatialIndex& index,
                         const Vec3& center, std::size_t k);

/// Boundary probe sites of a proxy mesh: midpoints of open edges
/// (incident to exactly one triangle) plus vertices whose incident
/// face normals disagree by more than `max_normal_angle_deg`. The
/// default tolerates right-angle creases — a box-like proxy is not
/// defective at its true edges — and flags only folded-back flaps.
/// A closed smooth mesh yields an empty set.
BoundarySet extract_boundary(const TriangleMesh& mesh,
                             double max_normal_angle_deg = 120.0);

/// Greedy maximum coverage: repeatedly picks the boundary point whose
/// radius-ball covers the most uncovered points (ties to the lowest
/// index), marks them covered, until `budget` centers are chosen or
/// everything is covered. Throws EmptyBoundary on an empty set.
std::vector<Vec3> greedy_cover(BoundarySet& boundary, double radius,
                               std::size_t budget);

/// One locked oblate disc per contact point: center on the contact,
/// short axis along the normal, footprint set by the patch's median
/// point spacing. Colors are copied from the nearest visual-origin
/// primitive in `existing` (background when there is none). Contacts
/// within 1e-9 of an existing touch primitive are skipped, so probing
/// the same spot twice cannot create coincident locked pairs.
std::vector<GaussianPrimitive> spawn_touch_gaussians(
    const TouchPatch& patch, const std::vector<GaussianPrimitive>& existing,
    const Vec3& background);

/// Removes visual-origin primitives within `distance_threshold` of the
/// patch center that sit farther than distance_threshold/2 from every
/// contact point: the probe reached through where they claim surface.
/// Touch-origin primitives are never removed. Returns the removed
/// indices (ascending, relative to the input ordering).
std::vector<std::size_t> prune_contradicted(
    std::vector<GaussianPrimitive>& gaussians, const TouchPatch& patch,
    double distance_threshold);

/// Largest center-to-contact distance; the pruning radius.
double patch_bounding_radius(const TouchPatch& patch);

/// Median nearest-neighbor spacing among the patch contacts; the
/// spawned primitives' footprint scale.
double median_patch_spacing(const TouchPatch& patch);

}  // namespace touchsplat
