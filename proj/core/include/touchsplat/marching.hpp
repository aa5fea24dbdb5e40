#pragma once

#include "touchsplat/mesh.hpp"
#include "touchsplat/types.hpp"

#include <vector>

namespace touchsplat {

/// Isosurface triangulation of the gaussian mixture density field
///   f(x) = sum_i opacity_i * exp(-0.5 (x - mu_i)^T Sigma_i^-1 (x - mu_i))
/// at iso-level 0.5 * (median density at the primitive centers) — half
/// the typical on-surface density, robust to dense clumps; for a single
/// primitive this equals half the peak. Built on a grid_resolution^3
/// cell grid over the model's 3-sigma bounding box. Cells are split
/// into six tetrahedra sharing the main diagonal, which avoids the
/// ambiguous-face cases of a cube-based table; shared edge vertices are
/// welded, triangles are oriented outward (against the density
/// gradient), and degenerate triangles are dropped.
///
/// The result is a disposable probe: holes in it are the signal read by
/// the boundary extraction. Throws EmptyModel on an empty gaussian set.
TriangleMesh build_proxy_mesh(const std::vector<GaussianPrimitive>& gaussians,
                              int grid_resolution);

}  // namespace touchsplat
