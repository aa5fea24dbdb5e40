// Evaluation cost per metrics record at the training operating point:
// a 2500-center model against a 100k-sample reference.

#include <benchmark/benchmark.h>

#include <touchsplat/metrics.hpp>

#include <random>
#include <vector>

using namespace touchsplat;

namespace {

std::vector<Vec3> shell_points(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = 0.4 * Vec3(g(rng), g(rng), g(rng)).normalized();
  return pts;
}

}  // namespace

static void BM_Chamfer(benchmark::State& state) {
  const auto recon = shell_points(2500, 1);
  const auto truth = shell_points(std::size_t(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(recon, truth));
}
BENCHMARK(BM_Chamfer)->Arg(20000)->Arg(100000);

static void BM_Fscore(benchmark::State& state) {
  const auto recon = shell_points(2500, 1);
  const auto truth = shell_points(100000, 2);
  const double tau = default_fscore_tau(truth);
  for (auto _ : state) benchmark::DoNotOptimize(fscore(recon, truth, tau));
}
BENCHMARK(BM_Fscore);

static void BM_Jsd(benchmark::State& state) {
  const auto recon = shell_points(2500, 1);
  const auto truth = shell_points(100000, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(jsd(recon, truth, int(state.range(0))));
}
BENCHMARK(BM_Jsd)->Arg(32);
