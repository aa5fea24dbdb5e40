#pragma once

#include "touchsplat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace touchsplat {

struct MetricsRecord {
  int iteration = 0;
  double cd_mm = 0.0;       // symmetric chamfer distance, millimeters
  double fscore_pct = 0.0;  // harmonic precision/recall mean, percent
  double jsd = 0.0;         // base-2 Jensen-Shannon divergence, in [0,1]
};

/// Symmetric chamfer distance between two point sets in millimeters:
/// half the sum of both directed mean nearest-neighbor distances,
/// non-squared, scaled from scene meters. Throws EmptySet.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// F-score in percent at threshold tau (meters): the harmonic mean of
/// precision (fraction of a within tau of b) and recall (fraction of b
/// within tau of a), or 0 when both vanish. Throws EmptySet.
double fscore(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
              double tau);

/// Default F-score threshold: 1% of the bounding-box diagonal of the
/// ground-truth set.
double default_fscore_tau(const std::vector<Vec3>& ground_truth);

/// Base-2 Jensen-Shannon divergence between voxel-occupancy histograms
/// of the two sets, binned on a shared grid over their joint bounding
/// box. Empty bins follow the 0*log 0 = 0 convention; the result lies
/// in [0,1]. Throws EmptySet; grid must be >= 2 per axis.
double jsd(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
           int grid = 32);

/// How a Gaussian model is turned into a point set for evaluation.
enum class ReconPointSet {
  Centers,                 // one point per primitive, at its mean
  OpacityWeightedSurface,  // ellipsoid-surface samples, opacity-weighted
};

std::vector<Vec3> reconstruction_points(
    const std::vector<GaussianPrimitive>& model,
    ReconPointSet kind = ReconPointSet::Centers,
    std::size_t surface_samples = 20000, std::uint64_t seed = 0);

/// CSV serialization: header "iteration,cd_mm,fscore_pct,jsd", one row
/// per record, numbers printed with %.10g. Byte-stable across runs.
std::string metrics_csv(const std::vector<MetricsRecord>& records);
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRecord>& records);

}  // namespace touchsplat
