#include "touchsplat/render.hpp"

#include "touchsplat/errors.hpp"
#include "touchsplat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace touchsplat {

namespace {

std::vector<RenderResult::Splat> project_splats(
    const std::vector<GaussianPrimitive>& gaussians, const Intrinsics& intr,
    const Pose& pose) {
  std::vector<RenderResult::Splat> splats;
  splats.reserve(gaussians.size());

  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const GaussianPrimitive& g = gaussians[i];
    if (to_camera(pose, g.mu).z() <= kZNear) continue;
    const ProjectedGaussian pg = project_covariance(intr, pose, g);

    RenderResult::Splat s;
    s.index = i;
    s.center = pg.center;
    s.depth = pg.depth;
    s.cov = pg.cov;
    s.inv_cov = pg.cov.inverse();
    s.opacity = g.opacity;
    s.color = g.color;

    const double rx = 3.0 * std::sqrt(pg.cov(0, 0));
    const double ry = 3.0 * std::sqrt(pg.cov(1, 1));
    s.x0 = std::max(0, int(std::floor(pg.center.x() - rx)));
    s.x1 = std::min(intr.width - 1, int(std::ceil(pg.center.x() + rx)));
    s.y0 = std::max(0, int(std::floor(pg.center.y() - ry)));
    s.y1 = std::min(intr.height - 1, int(std::ceil(pg.center.y() + ry)));
    if (s.x0 > s.x1 || s.y0 > s.y1) continue;
    splats.push_back(s);
  }

  // Front to back; stable so equal depths keep input order.
  std::stable_sort(splats.begin(), splats.end(),
                   [](const RenderResult::Splat& a, const RenderResult::Splat& b) {
                     return a.depth < b.depth;
                   });
  return splats;
}

struct Stripe {
  int row_begin, row_end;  // half-open
};

std::vector<Stripe> make_stripes(int height) {
  std::vector<Stripe> out(kRenderStripes);
  for (int s = 0; s < kRenderStripes; ++s)
    out[s] = {height * s / kRenderStripes, height * (s + 1) / kRenderStripes};
  return out;
}

// Runs fn(stripe_id) over all stripes, either inline or on a small
// thread pool. Stripes touch disjoint rows so no synchronization is
// needed beyond the joins.
template <typename Fn>
void for_each_stripe(int threads, const Fn& fn) {
  if (threads <= 1) {
    for (int s = 0; s < kRenderStripes; ++s) fn(s);
    return;
  }
  const int workers = std::min(threads, kRenderStripes);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int s = w; s < kRenderStripes; s += workers) fn(s);
    });
  }
  for (auto& t : pool) t.join();
}

// Per-splat gradient in screen space, before the projection chain.
struct SplatGrad2d {
  Vec2 d_center = Vec2::Zero();
  Mat2 d_cov = Mat2::Zero();
  double d_opacity = 0.0;
  Vec3 d_color = Vec3::Zero();
};

}  // namespace

RenderResult render(const std::vector<GaussianPrimitive>& gaussians,
                    const Intrinsics& intr, const Pose& pose,
                    const RenderOptions& opts) {
  RenderResult out;
  out.intr = intr;
  out.pose = pose;
  out.background = opts.background;
  out.gaussian_count = gaussians.size();
  out.color = RgbImage(intr.width, intr.height, Vec3::Zero());
  out.transmittance.assign(out.color.pixel_count(), 1.0);
  out.blend_count.assign(out.color.pixel_count(), 0);
  out.splats = project_splats(gaussians, intr, pose);

  const auto stripes = make_stripes(intr.height);
  for_each_stripe(opts.threads, [&](int sid) {
    const Stripe st = stripes[sid];
    for (const RenderResult::Splat& s : out.splats) {
      const int r0 = std::max(s.y0, st.row_begin);
      const int r1 = std::min(s.y1, st.row_end - 1);
      for (int v = r0; v <= r1; ++v) {
        for (int u = s.x0; u <= s.x1; ++u) {
          const std::size_t pi = std::size_t(v) * intr.width + u;
          double& t = out.transmittance[pi];
          if (t < kMinTransmittance) continue;
          const Vec2 d(u - s.center.x(), v - s.center.y());
          const double power = -0.5 * d.dot(s.inv_cov * d);
          const double alpha = std::min(kMaxAlpha, s.opacity * std::exp(power));
          out.color.px[pi] += t * alpha * s.color;
          out.blend_count[pi] += 1;
          t *= 1.0 - alpha;
        }
      }
    }
    for (int v = st.row_begin; v < st.row_end; ++v)
      for (int u = 0; u < intr.width; ++u) {
        const std::size_t pi = std::size_t(v) * intr.width + u;
        out.color.px[pi] += out.transmittance[pi] * opts.background;
      }
  });
  return out;
}

std::vector<GaussianGrads> render_backward(
    const std::vector<GaussianPrimitive>& gaussians, const RenderResult& fwd,
    const RgbImage& grad_color, const RenderOptions& opts) {
  if (gaussians.size() != fwd.gaussian_count)
    throw BufferMismatch("render_backward: gaussian count differs from forward pass");
  if (grad_color.width != fwd.color.width || grad_color.height != fwd.color.height)
    throw BufferMismatch("render_backward: gradient image dimensions differ");

  const Intrinsics& intr = fwd.intr;
  const std::size_t n_splats = fwd.splats.size();

  // One accumulator array per stripe; reduced in stripe order below so
  // the summation order never depends on thread scheduling.
  std::vector<std::vector<SplatGrad2d>> per_stripe(
      kRenderStripes, std::vector<SplatGrad2d>(n_splats));

  // Replay buffers: residual transmittance and the blended-color prefix
  // (background excluded) per pixel.
  std::vector<double> trans(fwd.color.pixel_count(), 1.0);
  std::vector<Vec3> prefix(fwd.color.pixel_count(), Vec3::Zero());

  const auto stripes = make_stripes(intr.height);
  for_each_stripe(opts.threads, [&](int sid) {
    const Stripe st = stripes[sid];
    std::vector<SplatGrad2d>& acc = per_stripe[sid];
    for (std::size_t si = 0; si < n_splats; ++si) {
      const RenderResult::Splat& s = fwd.splats[si];
      const int r0 = std::max(s.y0, st.row_begin);
      const int r1 = std::min(s.y1, st.row_end - 1);
      for (int v = r0; v <= r1; ++v) {
        for (int u = s.x0; u <= s.x1; ++u) {
          const std::size_t pi = std::size_t(v) * intr.width + u;
          double& t = trans[pi];
          if (t < kMinTransmittance) continue;
          const Vec2 d(u - s.center.x(), v - s.center.y());
          const double power = -0.5 * d.dot(s.inv_cov * d);
          const double gauss = std::exp(power);
          const double alpha_raw = s.opacity * gauss;
          const double alpha = std::min(kMaxAlpha, alpha_raw);

          prefix[pi] += t * alpha * s.color;
          const Vec3 g_pix = grad_color.px[pi];

          acc[si].d_color += g_pix * (t * alpha);

          // d(pixel)/d(alpha_i) = T_i c_i - suffix_i / (1 - alpha_i);
          // the suffix (later splats plus background) is recovered by
          // subtracting the running prefix from the final color.
          const Vec3 suffix = fwd.color.px[pi] - prefix[pi];
          const double g_alpha =
              g_pix.dot(Vec3(t * s.color - suffix / (1.0 - alpha)));

          if (alpha_raw < kMaxAlpha) {
            acc[si].d_opacity += g_alpha * gauss;
            const double g_power = g_alpha * s.opacity * gauss;
            const Vec2 ad = s.inv_cov * d;
            acc[si].d_center += g_power * ad;
            acc[si].d_cov += (0.5 * g_power) * (ad * ad.transpose());
          }
          t *= 1.0 - alpha;
        }
      }
    }
  });

  for (int s = 1; s < kRenderStripes; ++s)
    for (std::size_t i = 0; i < n_splats; ++i) {
      per_stripe[0][i].d_center += per_stripe[s][i].d_center;
      per_stripe[0][i].d_cov += per_stripe[s][i].d_cov;
      per_stripe[0][i].d_opacity += per_stripe[s][i].d_opacity;
      per_stripe[0][i].d_color += per_stripe[s][i].d_color;
    }

  // Chain the 2D gradients through projection back to world-space
  // parameters, one splat at a time.
  std::vector<GaussianGrads> out(gaussians.size());
  const Mat3 w = fwd.pose.r.transpose();
  for (std::size_t si = 0; si < n_splats; ++si) {
    const RenderResult::Splat& s = fwd.splats[si];
    const SplatGrad2d& g2 = per_stripe[0][si];
    const GaussianPrimitive& g = gaussians[s.index];
    GaussianGrads& gg = out[s.index];

    gg.d_color += g2.d_color;
    gg.d_opacity += g2.d_opacity;

    const Vec3 p = to_camera(fwd.pose, g.mu);
    const double x = p.x(), y = p.y(), z = p.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << intr.fx / z, 0.0, -intr.fx * x / (z * z),
           0.0, intr.fy / z, -intr.fy * y / (z * z);

    const Mat3 sigma = covariance(g);
    const Mat3 cov_cam = w * sigma * w.transpose();
    const Mat2 gc = 0.5 * (g2.d_cov + g2.d_cov.transpose());

    const Eigen::Matrix<double, 2, 3> d_jac = 2.0 * gc * jac * cov_cam;
    const Mat3 d_cov_cam = jac.transpose() * gc * jac;
    const Mat3 d_sigma = w.transpose() * d_cov_cam * w;

    const Mat3 r = g.rotation_matrix();
    const Mat3 d_r = 2.0 * d_sigma * r * g.scales.array().square().matrix().asDiagonal();
    gg.d_rotation += rotation_grad_to_quat(g.rotation, d_r);
    const Mat3 rsr = r.transpose() * d_sigma * r;
    for (int k = 0; k < 3; ++k) gg.d_scales(k) += 2.0 * g.scales(k) * rsr(k, k);

    Vec3 d_p = jac.transpose() * g2.d_center;
    const double z2 = z * z, z3 = z2 * z;
    d_p.x() += d_jac(0, 2) * (-intr.fx / z2);
    d_p.y() += d_jac(1, 2) * (-intr.fy / z2);
    d_p.z() += d_jac(0, 0) * (-intr.fx / z2) + d_jac(0, 2) * (2.0 * intr.fx * x / z3) +
               d_jac(1, 1) * (-intr.fy / z2) + d_jac(1, 2) * (2.0 * intr.fy * y / z3);
    gg.d_mu += fwd.pose.r * d_p;
  }
  return out;
}

}  // namespace touchsplat
