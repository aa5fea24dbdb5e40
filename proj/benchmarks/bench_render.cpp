// Rasterizer cost at the training operating point: 64x64 images over a
// few hundred primitives, forward and forward+backward.

#include <benchmark/benchmark.h>

#include <touchsplat/losses.hpp>
#include <touchsplat/render.hpp>

#include <random>
#include <vector>

using namespace touchsplat;

namespace {

Intrinsics train_cam(int size) {
  Intrinsics intr;
  intr.fx = intr.fy = 70.0 * size / 64.0;
  intr.cx = intr.cy = (size - 1) / 2.0;
  intr.width = intr.height = size;
  return intr;
}

std::vector<GaussianPrimitive> shell(std::size_t count) {
  std::vector<GaussianPrimitive> gs;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    GaussianPrimitive g;
    g.mu = 0.4 * Vec3(n(rng), n(rng), n(rng)).normalized();
    g.mu.z() += 2.5;
    g.rotation = Quat(n(rng), n(rng), n(rng), n(rng)).normalized();
    g.scales = Vec3::Constant(0.03 + 0.02 * u(rng));
    g.opacity = 0.3 + 0.6 * u(rng);
    g.color = Vec3(u(rng), u(rng), u(rng));
    gs.push_back(g);
  }
  return gs;
}

}  // namespace

static void BM_RenderForward(benchmark::State& state) {
  const auto gs = shell(std::size_t(state.range(0)));
  const Intrinsics intr = train_cam(64);
  RenderOptions opts;
  opts.threads = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(render(gs, intr, Pose{}, opts));
}
BENCHMARK(BM_RenderForward)->Arg(250)->Arg(1000)->Arg(2500);

static void BM_RenderForwardBackward(benchmark::State& state) {
  const auto gs = shell(std::size_t(state.range(0)));
  const Intrinsics intr = train_cam(64);
  RenderOptions opts;
  opts.threads = 1;
  const RgbImage truth(64, 64, Vec3::Constant(0.4));
  const LossWeights w;
  for (auto _ : state) {
    const RenderResult fwd = render(gs, intr, Pose{}, opts);
    const ImageLossResult il = image_loss(fwd.color, truth, w);
    benchmark::DoNotOptimize(render_backward(gs, fwd, il.grad, opts));
  }
}
BENCHMARK(BM_RenderForwardBackward)->Arg(250)->Arg(1000)->Arg(2500);

static void BM_Ssim(benchmark::State& state) {
  const int size = int(state.range(0));
  RgbImage a(size, size), b(size, size);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    a.px[i] = Vec3(u(rng), u(rng), u(rng));
    b.px[i] = Vec3(u(rng), u(rng), u(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(128);
