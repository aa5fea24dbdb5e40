#include <doctest.h>

#include <touchsplat/errors.hpp>
#include <touchsplat/losses.hpp>
#include <touchsplat/render.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace touchsplat;

namespace {

Intrinsics square_cam(int size, double f) {
  Intrinsics intr;
  intr.fx = intr.fy = f;
  intr.cx = intr.cy = (size - 1) / 2.0;
  intr.width = intr.height = size;
  return intr;
}

bool images_bitwise_equal(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height) return false;
  return std::memcmp(a.px.data(), b.px.data(),
                     a.px.size() * sizeof(Vec3)) == 0;
}

// Five gaussians whose 3-sigma screen boxes cover the whole 8x8 image
// for any +-h parameter bump: the bounding boxes, depth order and the
// early-termination pattern are then constant, which keeps the loss
// differentiable everywhere the finite differences sample it.
std::vector<GaussianPrimitive> wide_scene(unsigned seed, double jitter) {
  std::vector<GaussianPrimitive> gs;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    GaussianPrimitive g;
    g.mu = Vec3(0.22 * u(rng) + jitter, 0.22 * u(rng) - jitter,
                2.0 + 0.5 * i + 0.3 * jitter);
    Quat q(1.0, 0.25 * u(rng), 0.25 * u(rng), 0.25 * u(rng));
    g.rotation = q.normalized();
    g.scales = Vec3(0.62 + 0.08 * u(rng), 0.5 + 0.05 * u(rng),
                    0.72 + 0.08 * u(rng));
    g.opacity = 0.45 + 0.15 * u(rng);
    g.color = Vec3(0.5 + 0.35 * u(rng), 0.5 + 0.35 * u(rng),
                   0.5 + 0.35 * u(rng));
    gs.push_back(g);
  }
  return gs;
}

}  // namespace

TEST_CASE("empty scene renders the background") {
  const Intrinsics intr = square_cam(6, 10.0);
  RenderOptions opts;
  opts.background = Vec3(0.1, 0.2, 0.3);
  const RenderResult r = render({}, intr, Pose{}, opts);
  CHECK(r.splats.empty());
  for (std::size_t i = 0; i < r.color.pixel_count(); ++i) {
    CHECK((r.color.px[i] - opts.background).norm() == 0.0);
    CHECK(r.transmittance[i] == 1.0);
    CHECK(r.blend_count[i] == 0);
  }
}

TEST_CASE("two stacked splats blend front to back") {
  // 9x9 with cx = cy = 4: an on-axis gaussian peaks exactly at pixel
  // (4,4) where the falloff term is 1, so alpha equals the opacity and
  // the blend reduces to powers of two.
  const Intrinsics intr = square_cam(9, 20.0);
  std::vector<GaussianPrimitive> gs(2);
  gs[0] = GaussianPrimitive::sphere({0, 0, 2}, 0.3);
  gs[0].opacity = 0.5;
  gs[0].color = Vec3(1, 0, 0);
  gs[1] = GaussianPrimitive::sphere({0, 0, 3}, 0.45);
  gs[1].opacity = 0.5;
  gs[1].color = Vec3(0, 0, 1);

  RenderOptions opts;
  opts.background = Vec3::Constant(0.5);
  const RenderResult r = render(gs, intr, Pose{}, opts);

  // 0.5*red + 0.25*blue + 0.25*gray, exactly.
  const Vec3 expected(0.625, 0.125, 0.375);
  CHECK((r.color.at(4, 4) - expected).norm() < 1e-15);
  CHECK(r.transmittance[4 * 9 + 4] == 0.25);
  CHECK(r.blend_count[4 * 9 + 4] == 2);
  REQUIRE(r.splats.size() == 2);
  CHECK(r.splats[0].depth < r.splats[1].depth);
}

TEST_CASE("opacity is capped below one") {
  const Intrinsics intr = square_cam(9, 20.0);
  GaussianPrimitive g = GaussianPrimitive::sphere({0, 0, 2}, 0.4);
  g.opacity = 1.0;
  g.color = Vec3(1, 0, 0);
  RenderOptions opts;
  opts.background = Vec3::Zero();
  const RenderResult r = render({g}, intr, Pose{}, opts);
  CHECK(r.color.at(4, 4).x() == kMaxAlpha);
  CHECK(r.transmittance[4 * 9 + 4] == 1.0 - kMaxAlpha);
}

TEST_CASE("input order does not affect the image") {
  const Intrinsics intr = square_cam(16, 24.0);
  std::vector<GaussianPrimitive> gs;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    GaussianPrimitive g = GaussianPrimitive::sphere(
        {0.4 * u(rng), 0.4 * u(rng), 2.0 + 0.37 * i}, 0.15 + 0.1 * u(rng) * 0.5);
    g.opacity = 0.4 + 0.2 * u(rng);
    g.color = Vec3(0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng));
    gs.push_back(g);
  }
  const RenderResult a = render(gs, intr, Pose{});
  std::shuffle(gs.begin(), gs.end(), rng);
  const RenderResult b = render(gs, intr, Pose{});
  CHECK(images_bitwise_equal(a.color, b.color));
}

TEST_CASE("thread count does not affect the image") {
  const Intrinsics intr = square_cam(33, 40.0);
  const auto gs = wide_scene(11, 0.0);
  RenderOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const RenderResult a = render(gs, intr, Pose{}, one);
  const RenderResult b = render(gs, intr, Pose{}, four);
  CHECK(images_bitwise_equal(a.color, b.color));
  CHECK(a.transmittance == b.transmittance);
}

TEST_CASE("blending matches the back-to-front recursion") {
  // Recomputing each pixel two ways from the cached splats: the
  // iterative front-to-back form the rasterizer uses must agree with
  // the textbook over-operator recursion.
  const Intrinsics intr = square_cam(9, 18.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<GaussianPrimitive> gs;
    for (int i = 0; i < 10; ++i) {
      GaussianPrimitive g = GaussianPrimitive::sphere(
          {0.3 * (2 * u(rng) - 1), 0.3 * (2 * u(rng) - 1), 1.5 + 0.4 * i},
          0.3 + 0.2 * u(rng));
      g.opacity = 0.1 + 0.4 * u(rng);
      g.color = Vec3(u(rng), u(rng), u(rng));
      gs.push_back(g);
    }
    RenderOptions opts;
    opts.background = Vec3(u(rng), u(rng), u(rng));
    const RenderResult r = render(gs, intr, Pose{}, opts);

    for (int v = 0; v < intr.height; v += 3) {
      for (int uu = 0; uu < intr.width; uu += 3) {
        std::vector<double> alphas;
        std::vector<Vec3> colors;
        for (const auto& s : r.splats) {
          if (uu < s.x0 || uu > s.x1 || v < s.y0 || v > s.y1) continue;
          const Vec2 d(uu - s.center.x(), v - s.center.y());
          const double a =
              std::min(kMaxAlpha, s.opacity * std::exp(-0.5 * d.dot(s.inv_cov * d)));
          alphas.push_back(a);
          colors.push_back(s.color);
        }
        // Keep clear of the early-termination cutoff so both replays
        // see every contribution the renderer saw.
        double t = 1.0;
        for (double a : alphas) t *= 1.0 - a;
        if (t < 10 * kMinTransmittance) continue;

        Vec3 fb = Vec3::Zero();
        t = 1.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
          fb += t * alphas[i] * colors[i];
          t *= 1.0 - alphas[i];
        }
        fb += t * opts.background;

        Vec3 bf = opts.background;
        for (std::size_t i = alphas.size(); i-- > 0;)
          bf = alphas[i] * colors[i] + (1.0 - alphas[i]) * bf;

        CHECK((fb - r.color.at(uu, v)).norm() < 1e-14);
        CHECK((fb - bf).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("backward rejects mismatched buffers") {
  const Intrinsics intr = square_cam(8, 16.0);
  const auto gs = wide_scene(7, 0.0);
  const RenderResult fwd = render(gs, intr, Pose{});
  RgbImage grad(intr.width, intr.height, Vec3::Constant(1.0));

  auto fewer = gs;
  fewer.pop_back();
  CHECK_THROWS_AS(render_backward(fewer, fwd, grad), BufferMismatch);
  RgbImage wrong(intr.width - 1, intr.height, Vec3::Zero());
  CHECK_THROWS_AS(render_backward(gs, fwd, wrong), BufferMismatch);
}

TEST_CASE("backward matches finite differences of the visual loss") {
  // End-to-end gradient check: L(params) = image_loss(render(params)).
  // Central differences with h = 1e-5, compared per parameter class.
  const Intrinsics intr = square_cam(8, 16.0);
  const auto gs = wide_scene(99, 0.0);
  const LossWeights w;
  RenderOptions opts;
  opts.background = Vec3::Constant(0.35);
  opts.threads = 1;

  // Truth from a jittered copy under a shifted background keeps every
  // pixel residual well away from the L1 kink at zero: splat-dominated
  // pixels differ through the jitter, background-dominated ones through
  // the background gap.
  RenderOptions topts = opts;
  topts.background = Vec3::Constant(0.55);
  auto truth_scene = wide_scene(99, 0.06);
  for (std::size_t i = 0; i < truth_scene.size(); ++i)
    truth_scene[i].color =
        (truth_scene[i].color + Vec3::Constant(0.12 + 0.03 * double(i)))
            .cwiseMin(1.0);
  const RgbImage truth = render(truth_scene, intr, Pose{}, topts).color;
  {
    const RgbImage base = render(gs, intr, Pose{}, opts).color;
    double min_res = 1e9;
    for (std::size_t i = 0; i < base.pixel_count(); ++i)
      min_res = std::min(min_res,
                         (base.px[i] - truth.px[i]).cwiseAbs().minCoeff());
    REQUIRE(min_res > 1e-3);
  }

  auto loss_of = [&](const std::vector<GaussianPrimitive>& v) {
    return image_loss(render(v, intr, Pose{}, opts).color, truth, w).loss;
  };

  const RenderResult fwd = render(gs, intr, Pose{}, opts);
  const ImageLossResult il = image_loss(fwd.color, truth, w);
  const auto analytic = render_backward(gs, fwd, il.grad, opts);

  const double h = 1e-5;
  auto fd_scalar = [&](std::size_t gi, auto&& bump) {
    auto plus = gs, minus = gs;
    bump(plus[gi], h);
    bump(minus[gi], -h);
    return (loss_of(plus) - loss_of(minus)) / (2 * h);
  };

  struct ClassErr {
    double err = 0.0, ref = 0.0;
    void add(double a, double f) {
      err = std::max(err, std::abs(a - f));
      ref = std::max(ref, std::abs(f));
    }
    double rel() const { return err / std::max(ref, 1e-12); }
  };
  ClassErr e_mu, e_rot, e_scales, e_opacity, e_color;

  for (std::size_t gi = 0; gi < gs.size(); ++gi) {
    for (int k = 0; k < 3; ++k) {
      e_mu.add(analytic[gi].d_mu(k), fd_scalar(gi, [&](GaussianPrimitive& g,
                                                       double eps) {
                 g.mu(k) += eps;
               }));
      e_scales.add(analytic[gi].d_scales(k),
                   fd_scalar(gi, [&](GaussianPrimitive& g, double eps) {
                     g.scales(k) += eps;
                   }));
      e_color.add(analytic[gi].d_color(k),
                  fd_scalar(gi, [&](GaussianPrimitive& g, double eps) {
                    g.color(k) += eps;
                  }));
    }
    for (int k = 0; k < 4; ++k) {
      // Raw-coefficient bump; the forward pass renormalizes, which is
      // exactly the map the tangent-projected gradient differentiates.
      e_rot.add(analytic[gi].d_rotation(k),
                fd_scalar(gi, [&](GaussianPrimitive& g, double eps) {
                  g.rotation.coeffs()(k) += eps;
                }));
    }
    e_opacity.add(analytic[gi].d_opacity,
                  fd_scalar(gi, [&](GaussianPrimitive& g, double eps) {
                    g.opacity += eps;
                  }));
  }

  CHECK(e_mu.rel() < 1e-4);
  CHECK(e_rot.rel() < 1e-4);
  CHECK(e_scales.rel() < 1e-4);
  CHECK(e_opacity.rel() < 1e-4);
  CHECK(e_color.rel() < 1e-4);
}

TEST_CASE("capped contributions freeze their shape gradients") {
  // Once alpha saturates, opacity and geometry no longer change the
  // image through that pixel; only the color gradient survives.
  const Intrinsics intr = square_cam(9, 20.0);
  // Radius 5 at depth 2 keeps the falloff above 0.99 out to the image
  // corners, so every blended pixel sits on the cap.
  GaussianPrimitive g = GaussianPrimitive::sphere({0, 0, 2}, 5.0);
  g.opacity = 1.0;
  g.color = Vec3(0.3, 0.6, 0.9);
  const RenderResult fwd = render({g}, intr, Pose{});

  bool all_capped = true;
  REQUIRE(fwd.splats.size() == 1);
  const auto& s = fwd.splats[0];
  for (int v = 0; v < intr.height && all_capped; ++v)
    for (int u = 0; u < intr.width; ++u) {
      const Vec2 d(u - s.center.x(), v - s.center.y());
      if (s.opacity * std::exp(-0.5 * d.dot(s.inv_cov * d)) < kMaxAlpha) {
        all_capped = false;
        break;
      }
    }
  REQUIRE(all_capped);

  RgbImage grad(intr.width, intr.height, Vec3::Constant(1.0));
  const auto gr = render_backward({g}, fwd, grad);
  CHECK(gr[0].d_opacity == 0.0);
  CHECK(gr[0].d_mu.norm() == 0.0);
  CHECK(gr[0].d_scales.norm() == 0.0);
  CHECK(gr[0].d_rotation.norm() == 0.0);
  CHECK(gr[0].d_color.norm() > 0.0);
}
