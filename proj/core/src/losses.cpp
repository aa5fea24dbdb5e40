#include "touchsplat/losses.hpp"

#include "touchsplat/errors.hpp"
#include "touchsplat/geometry.hpp"
#include "touchsplat/kdtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace touchsplat {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWindow>& window_1d() {
  static const std::array<double, kWindow> w = [] {
    std::array<double, kWindow> out{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = i - kHalf;
      out[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
  }();
  return w;
}

using Plane = std::vector<double>;

// Separable zero-padded 'same' convolution with the SSIM window. The
// kernel is symmetric, so this operator is its own adjoint.
Plane blur(const Plane& in, int w, int h) {
  const auto& k = window_1d();
  Plane mid(in.size(), 0.0), out(in.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -kHalf; i <= kHalf; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < w) acc += k[i + kHalf] * in[std::size_t(y) * w + xx];
      }
      mid[std::size_t(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -kHalf; i <= kHalf; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < h) acc += k[i + kHalf] * mid[std::size_t(yy) * w + x];
      }
      out[std::size_t(y) * w + x] = acc;
    }
  return out;
}

struct ChannelSsim {
  double mean = 0.0;
  Plane grad;  // d(mean SSIM)/d(x pixel); empty unless requested
};

ChannelSsim ssim_channel(const Plane& x, const Plane& y, int w, int h,
                         bool want_grad) {
  const std::size_t n = x.size();
  Plane x2(n), y2(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x2[i] = x[i] * x[i];
    y2[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const Plane mx = blur(x, w, h), my = blur(y, w, h);
  const Plane bx2 = blur(x2, w, h), by2 = blur(y2, w, h), bxy = blur(xy, w, h);

  ChannelSsim out;
  Plane g1, g2, g3, g2mx, g3my;
  if (want_grad) {
    g1.resize(n);
    g2.resize(n);
    g3.resize(n);
    g2mx.resize(n);
    g3my.resize(n);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sx = bx2[i] - mx[i] * mx[i];
    const double sy = by2[i] - my[i] * my[i];
    const double sxy = bxy[i] - mx[i] * my[i];
    const double a1 = 2.0 * mx[i] * my[i] + kC1;
    const double a2 = 2.0 * sxy + kC2;
    const double b1 = mx[i] * mx[i] + my[i] * my[i] + kC1;
    const double b2 = sx + sy + kC2;
    const double denom = b1 * b2;
    total += (a1 * a2) / denom;
    if (want_grad) {
      // Partials of the per-pixel SSIM value with respect to the local
      // statistics (mean, variance, covariance) of x. Grouped as exact
      // ratios so identical images produce a bitwise-zero gradient:
      // there a1 == b1 and a2 == b2, the ratios collapse to 1, and the
      // terms cancel without rounding residue.
      g1[i] = 2.0 * a2 * (my[i] - mx[i] * (a1 / b1)) / denom;
      g2[i] = -(a1 / denom) * (a2 / b2);
      g3[i] = 2.0 * a1 / denom;
      g2mx[i] = g2[i] * mx[i];
      g3my[i] = g3[i] * my[i];
    }
  }
  out.mean = total / double(n);
  if (want_grad) {
    // Adjoint of the windowed statistics: each blur below distributes a
    // per-pixel coefficient back over the window support.
    const Plane bg1 = blur(g1, w, h), bg2 = blur(g2, w, h), bg3 = blur(g3, w, h);
    const Plane bg2mx = blur(g2mx, w, h), bg3my = blur(g3my, w, h);
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      out.grad[i] = (bg1[i] + (2.0 * x[i] * bg2[i] + y[i] * bg3[i]) -
                     (2.0 * bg2mx[i] + bg3my[i])) /
                    double(n);
  }
  return out;
}

Plane channel_plane(const RgbImage& img, int c) {
  Plane out(img.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.px[i](c);
  return out;
}

void check_dims(const RgbImage& a, const RgbImage& b, const char* who) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionMismatch(std::string(who) + ": image dimensions differ");
}

}  // namespace

double ssim(const RgbImage& a, const RgbImage& b) {
  check_dims(a, b, "ssim");
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    total += ssim_channel(channel_plane(a, c), channel_plane(b, c), a.width,
                          a.height, false)
                 .mean;
  }
  return total / 3.0;
}

ImageLossResult image_loss(const RgbImage& rendered, const RgbImage& truth,
                           const LossWeights& w) {
  check_dims(rendered, truth, "image_loss");
  const double lambda = w.lambda_ssim;
  const double n = double(rendered.pixel_count()) * 3.0;

  ImageLossResult out;
  out.grad = RgbImage(rendered.width, rendered.height, Vec3::Zero());

  double l1 = 0.0;
  for (std::size_t i = 0; i < rendered.pixel_count(); ++i) {
    const Vec3 diff = rendered.px[i] - truth.px[i];
    l1 += diff.cwiseAbs().sum();
    out.grad.px[i] = (1.0 - lambda) / n * diff.array().sign().matrix();
  }
  l1 /= n;

  double ssim_total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const ChannelSsim cs = ssim_channel(channel_plane(rendered, c),
                                        channel_plane(truth, c),
                                        rendered.width, rendered.height, true);
    ssim_total += cs.mean;
    for (std::size_t i = 0; i < rendered.pixel_count(); ++i)
      out.grad.px[i](c) -= lambda / 3.0 * cs.grad[i];
  }
  out.loss = (1.0 - lambda) * l1 + lambda * (1.0 - ssim_total / 3.0);
  return out;
}

PairSet build_pair_set(const std::vector<GaussianPrimitive>& gaussians,
                       const std::vector<bool>& region_mask, int m) {
  std::vector<std::size_t> region;
  for (std::size_t i = 0; i < gaussians.size() && i < region_mask.size(); ++i)
    if (region_mask[i]) region.push_back(i);
  if (region.size() < 2)
    throw TooFewPrimitives("build_pair_set: region needs at least 2 primitives");

  std::vector<Vec3> centers(region.size());
  for (std::size_t r = 0; r < region.size(); ++r)
    centers[r] = gaussians[region[r]].mu;
  const SpatialIndex index(std::move(centers));

  PairSet out;
  for (std::size_t r = 0; r < region.size(); ++r) {
    const std::size_t want = std::min<std::size_t>(m, region.size() - 1);
    // The query point is itself in the index; ask for one extra hit and
    // drop the self match.
    const auto hits = index.nearest(gaussians[region[r]].mu, want + 1);
    for (const auto& h : hits) {
      if (h.index == r) continue;
      const std::size_t a = region[r], b = region[h.index];
      out.pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()),
                  out.pairs.end());
  return out;
}

TouchLossResult touch_loss(const std::vector<GaussianPrimitive>& gaussians,
                           const PairSet& pairs) {
  if (pairs.pairs.empty()) throw EmptyPairSet("touch_loss: no pairs");

  TouchLossResult out;
  out.grads.assign(gaussians.size(), GaussianGrads{});
  const double scale = 1.0 / double(pairs.pairs.size());

  for (const auto& [i, j] : pairs.pairs) {
    const PairGapGrads pg = pair_gap_grads(gaussians[i], gaussians[j]);
    out.loss += pg.gap * pg.gap;
    const double w = 2.0 * pg.gap * scale;
    if (!gaussians[i].locked) {
      out.grads[i].d_mu += w * pg.d_mu_i;
      out.grads[i].d_rotation += w * pg.d_rot_i;
      out.grads[i].d_scales += w * pg.d_scales_i;
    }
    if (!gaussians[j].locked) {
      out.grads[j].d_mu += w * pg.d_mu_j;
      out.grads[j].d_rotation += w * pg.d_rot_j;
      out.grads[j].d_scales += w * pg.d_scales_j;
    }
  }
  out.loss *= scale;
  return out;
}

}  // namespace touchsplat
