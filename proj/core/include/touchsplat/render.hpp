#pragma once

#include "touchsplat/camera.hpp"
#include "touchsplat/types.hpp"

#include <cstddef>
#include <vector>

namespace touchsplat {

// Blending stops once a pixel's residual transmittance drops below this.
inline constexpr double kMinTransmittance = 1e-4;

// Per-contribution opacity ceiling; keeps (1 - alpha) bounded away from
// zero so the compositing chain stays differentiable and invertible.
inline constexpr double kMaxAlpha = 0.99;

// Rows are split into this many fixed horizontal stripes. The count is
// independent of the thread count so results are byte-identical across
// any parallel configuration.
inline constexpr int kRenderStripes = 8;

struct RenderOptions {
  Vec3 background = Vec3::Constant(0.5);
  int threads = 0;  // <= 1 renders on the calling thread
};

struct RenderResult {
  RgbImage color;
  std::vector<double> transmittance;  // residual T per pixel
  std::vector<int> blend_count;       // splats blended per pixel

  // Projection cache consumed by render_backward; depth-sorted and
  // culled to splats that actually overlap the image.
  struct Splat {
    std::size_t index;  // position in the input gaussian vector
    Vec2 center;        // projected mean, pixel coords
    double depth;       // camera-space z
    Mat2 cov, inv_cov;  // screen-space covariance and its inverse
    double opacity;
    Vec3 color;
    int x0, x1, y0, y1;  // inclusive pixel bounds of the 3-sigma box
  };
  std::vector<Splat> splats;
  Intrinsics intr;
  Pose pose;
  Vec3 background = Vec3::Zero();
  std::size_t gaussian_count = 0;
};

/// Software rasterization of a gaussian set: global front-to-back depth
/// sort (ties keep input order), per-pixel alpha blending
///   C = sum_i T_i alpha_i c_i + T_final * background,
///   T_i = prod_{j<i} (1 - alpha_j),
/// with alpha_i = opacity_i * exp(-0.5 d^T cov^-1 d) capped at kMaxAlpha.
RenderResult render(const std::vector<GaussianPrimitive>& gaussians,
                    const Intrinsics& intr, const Pose& pose,
                    const RenderOptions& opts = {});

/// Pulls a pixel-space gradient back through compositing and projection
/// onto gaussian parameters. `grad_color` holds dL/d(output pixel).
/// Returns one entry per input gaussian; zero where a gaussian never
/// contributed. Throws BufferMismatch if `fwd` does not match the
/// gaussian set or the gradient image dimensions.
std::vector<GaussianGrads> render_backward(
    const std::vector<GaussianPrimitive>& gaussians, const RenderResult& fwd,
    const RgbImage& grad_color, const RenderOptions& opts = {});

}  // namespace touchsplat
