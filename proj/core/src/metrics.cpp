#include "touchsplat/metrics.hpp"

#include "touchsplat/errors.hpp"
#include "touchsplat/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace touchsplat {

namespace {

// Nearest-neighbor distance from every query point into `target`.
// Slots are independent, the final reduction is sequential, so results
// do not depend on evaluation order.
std::vector<double> nn_distances(const std::vector<Vec3>& queries,
                                 const SpatialIndex& target) {
  std::vector<double> d(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i)
    d[i] = target.nearest(queries[i], 1).front().distance;
  return d;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

void require_non_empty(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
                       const char* op) {
  if (a.empty() || b.empty())
    throw EmptySet(std::string(op) + ": both point sets must be non-empty");
}

}  // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  require_non_empty(a, b, "chamfer");
  const SpatialIndex ia(a), ib(b);
  const double forward = mean_of(nn_distances(a, ib));
  const double backward = mean_of(nn_distances(b, ia));
  return 0.5 * (forward + backward) * 1000.0;
}

double fscore(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
              double tau) {
  require_non_empty(a, b, "fscore");
  const SpatialIndex ia(a), ib(b);
  auto fraction_within = [tau](const std::vector<double>& d) {
    std::size_t hits = 0;
    for (double x : d)
      if (x <= tau) ++hits;
    return double(hits) / double(d.size());
  };
  const double precision = fraction_within(nn_distances(a, ib));
  const double recall = fraction_within(nn_distances(b, ia));
  if (precision + recall == 0.0) return 0.0;
  return 200.0 * precision * recall / (precision + recall);
}

double default_fscore_tau(const std::vector<Vec3>& ground_truth) {
  if (ground_truth.empty())
    throw EmptySet("default_fscore_tau: empty ground truth");
  Vec3 lo = ground_truth.front(), hi = ground_truth.front();
  for (const Vec3& p : ground_truth) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return 0.01 * (hi - lo).norm();
}

double jsd(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int grid) {
  require_non_empty(a, b, "jsd");
  if (grid < 2) throw DimensionMismatch("jsd: grid resolution must be >= 2");

  Vec3 lo = a.front(), hi = a.front();
  for (const Vec3& p : a) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (const Vec3& p : b) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = hi - lo;

  auto bin = [&](const Vec3& p) {
    std::size_t idx = 0;
    for (int axis = 0; axis < 3; ++axis) {
      int cell = 0;
      if (extent(axis) > 0.0) {
        cell = int(std::floor((p(axis) - lo(axis)) / extent(axis) * grid));
        cell = std::clamp(cell, 0, grid - 1);
      }
      idx = idx * std::size_t(grid) + std::size_t(cell);
    }
    return idx;
  };

  const std::size_t bins = std::size_t(grid) * grid * grid;
  std::vector<double> p(bins, 0.0), q(bins, 0.0);
  for (const Vec3& x : a) p[bin(x)] += 1.0;
  for (const Vec3& x : b) q[bin(x)] += 1.0;
  for (double& x : p) x /= double(a.size());
  for (double& x : q) x /= double(b.size());

  const double inv_log2 = 1.0 / std::log(2.0);
  double divergence = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) divergence += 0.5 * p[i] * std::log(p[i] / m) * inv_log2;
    if (q[i] > 0.0) divergence += 0.5 * q[i] * std::log(q[i] / m) * inv_log2;
  }
  return divergence;
}

std::vector<Vec3> reconstruction_points(
    const std::vector<GaussianPrimitive>& model, ReconPointSet kind,
    std::size_t surface_samples, std::uint64_t seed) {
  if (model.empty()) throw EmptyModel("reconstruction_points: empty model");

  if (kind == ReconPointSet::Centers) {
    std::vector<Vec3> pts;
    pts.reserve(model.size());
    for (const GaussianPrimitive& g : model) pts.push_back(g.mu);
    return pts;
  }

  // Opacity-weighted surface sampling: primitives are drawn with
  // probability proportional to opacity, points taken by mapping a
  // uniform sphere direction through each ellipsoid's axes.
  std::vector<double> cdf(model.size());
  double total = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    total += model[i].opacity;
    cdf[i] = total;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(surface_samples);
  for (std::size_t s = 0; s < surface_samples; ++s) {
    const double pick = uni(rng) * total;
    std::size_t i = std::size_t(
        std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
    if (i >= model.size()) i = model.size() - 1;
    const double z = 1.0 - 2.0 * uni(rng);
    const double phi = 2.0 * M_PI * uni(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(r * std::cos(phi), r * std::sin(phi), z);
    const GaussianPrimitive& g = model[i];
    pts.push_back(g.mu + g.rotation_matrix() *
                             (g.scales.cwiseProduct(dir)));
  }
  return pts;
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "iteration,cd_mm,fscore_pct,jsd\n";
  char buf[160];
  for (const MetricsRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", r.iteration,
                  r.cd_mm, r.fscore_pct, r.jsd);
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRecord>& records) {
  std::ofstream f(path, std::ios::binary);
  const std::string body = metrics_csv(records);
  f.write(body.data(), std::streamsize(body.size()));
}

}  // namespace touchsplat
