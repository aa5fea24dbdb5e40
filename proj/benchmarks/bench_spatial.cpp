// Spatial-query and surface-extraction cost: the nearest-neighbor index
// backs metrics and patch acquisition; the marching pass backs the
// boundary sampling stage.

#include <benchmark/benchmark.h>

#include <touchsplat/kdtree.hpp>
#include <touchsplat/marching.hpp>

#include <random>
#include <vector>

using namespace touchsplat;

namespace {

std::vector<Vec3> cloud(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

}  // namespace

static void BM_IndexBuild(benchmark::State& state) {
  const auto pts = cloud(std::size_t(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(SpatialIndex(pts));
}
BENCHMARK(BM_IndexBuild)->Arg(2500)->Arg(100000);

static void BM_IndexNearest(benchmark::State& state) {
  const auto pts = cloud(100000, 3);
  const auto queries = cloud(1000, 4);
  const SpatialIndex index(pts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.nearest(queries[i], 1));
    i = (i + 1) % queries.size();
  }
}
BENCHMARK(BM_IndexNearest);

static void BM_IndexPatchQuery(benchmark::State& state) {
  // The contact-patch workload: 50 neighbors out of a probe-sized set.
  const auto pts = cloud(2500, 7);
  const auto queries = cloud(100, 8);
  const SpatialIndex index(pts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.nearest(queries[i], 50));
    i = (i + 1) % queries.size();
  }
}
BENCHMARK(BM_IndexPatchQuery);

static void BM_ProxyMesh(benchmark::State& state) {
  std::vector<GaussianPrimitive> gs;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (int i = 0; i < int(state.range(0)); ++i) {
    GaussianPrimitive g;
    g.mu = 0.4 * Vec3(n(rng), n(rng), n(rng)).normalized();
    g.scales = Vec3::Constant(0.05);
    g.opacity = 0.6;
    gs.push_back(g);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(build_proxy_mesh(gs, int(state.range(1))));
}
BENCHMARK(BM_ProxyMesh)->Args({500, 32})->Args({2500, 32});
