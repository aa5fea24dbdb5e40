#pragma once

#include "touchsplat/camera.hpp"
#include "touchsplat/types.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace touchsplat {

struct LossWeights {
  double lambda_ssim = 0.2;   // SSIM share of the visual loss
  double lambda_touch = 1.0;  // weight of the geometric term in the total
  int neighbor_count = 3;     // m nearest neighbors per paired primitive
};

/// Mean SSIM between two images: 11x11 Gaussian window (sigma 1.5),
/// zero-padded 'same' convolution, C1 = 0.01^2 and C2 = 0.03^2 on a
/// [0,1] dynamic range, evaluated per channel and averaged.
/// Throws DimensionMismatch on differing sizes.
double ssim(const RgbImage& a, const RgbImage& b);

struct ImageLossResult {
  double loss = 0.0;
  RgbImage grad;  // dL/d(rendered pixel)
};

/// Composite visual loss
///   L = (1 - lambda) * (1/N) * sum |rendered - truth| + lambda * (1 - SSIM)
/// with N the pixel-channel count. Returns the loss and its gradient
/// with respect to the rendered image.
ImageLossResult image_loss(const RgbImage& rendered, const RgbImage& truth,
                           const LossWeights& w);

/// Unordered index pairs into a gaussian vector, canonicalized to
/// first < second and sorted; no duplicates.
struct PairSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Pairs every region primitive with its m nearest region neighbors by
/// center distance (ties to the lower index). `region_mask` selects the
/// participating primitives. Throws TooFewPrimitives if the region has
/// fewer than two members. Output is independent of input ordering.
PairSet build_pair_set(const std::vector<GaussianPrimitive>& gaussians,
                       const std::vector<bool>& region_mask, int m);

struct TouchLossResult {
  double loss = 0.0;
  std::vector<GaussianGrads> grads;  // one per input gaussian
};

/// Mean squared surface gap over the pair set:
///   L = (1/|pairs|) * sum gap(i,j)^2
/// with analytic gradients for centers, orientations and semi-axes.
/// Locked primitives get exactly zero geometric gradients. Throws
/// EmptyPairSet on an empty pair set; CoincidentCenters propagates from
/// degenerate pairs.
TouchLossResult touch_loss(const std::vector<GaussianPrimitive>& gaussians,
                           const PairSet& pairs);

inline double total_loss(double image_part, double touch_part,
                         const LossWeights& w) {
  return image_part + w.lambda_touch * touch_part;
}

}  // namespace touchsplat
