#pragma once

#include "touchsplat/losses.hpp"
#include "touchsplat/metrics.hpp"
#include "touchsplat/scene.hpp"
#include "touchsplat/touch.hpp"
#include "touchsplat/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace touchsplat {

// Standard splatting-optimizer rates; mu is multiplied by the scene extent
// at initialization so position steps scale with object size.
struct LearningRates {
  double mu = 1.6e-4;
  double quaternion = 1e-3;
  double scales = 5e-3;
  double opacity = 5e-2;
  double color = 2.5e-3;
};

struct TrainConfig {
  int iterations = 400;
  std::uint64_t seed = 1;
  Condition condition = Condition::None;
  int image_size = 64;
  int threads = 0;

  LearningRates lr;
  LossWeights loss;

  bool touch_enabled = true;
  // One event per optimizer step: the probed area keeps expanding over
  // the whole object instead of freezing after a handful of contacts.
  int touch_cadence = 1;
  int patches_per_event = 2;    // parallel-jaw gripper: two contacts
  int points_per_patch = 50;    // k contacts per patch
  // The probe resamples the surface at its own (sensor) resolution; the
  // count is matched to the primitive budget so a fully probed object is
  // exactly representable. Patch extent follows from it: the k-NN patch
  // radius is sqrt(k * area / (pi * touch_samples)).
  std::size_t touch_samples = 2500;
  int proxy_grid = 32;          // marching grid for the Boundary stage
  double stage_switch_ratio = 1.5;    // max gap < ratio * median gap
  double coverage_radius_scale = 3.0; // times median probe spacing
  double boundary_angle_deg = 120.0;  // proxy normal-fold tolerance

  int metric_cadence = 50;
  std::size_t ground_truth_samples = 100000;  // evaluation fidelity only
  int jsd_grid = 32;
  double fscore_tau = 0.0;  // <= 0 picks 1% of ground-truth diagonal
  ReconPointSet eval_points = ReconPointSet::Centers;
  std::size_t surface_samples = 20000;  // when eval_points == surface

  std::size_t max_gaussians = 2500;
  double init_target_spacing = 0.035;  // meters; voxel = 2x this

  std::vector<int> render_views = {0};  // RGB views exported as PNGs
  int render_cadence = 0;  // 0 = final iteration only

  /// Schedule for visual_step's view choice; round-robin keeps runs
  /// reproducible without consuming RNG state.
  bool random_views = false;
};

/// JSON round-trip for configs. `merge_config` overlays only the keys
/// present in `text` onto `base` (unknown keys are an Error); the CLI
/// uses it so file values sit between defaults and explicit flags.
std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);
TrainConfig merge_config(const TrainConfig& base, const std::string& text);

const char* condition_name(Condition c);
Condition condition_from_name(const std::string& name);

enum class Stage { Sparsity, Boundary };

/// First/second moment accumulators for one primitive's parameters.
struct MomentPair {
  GaussianGrads m1, m2;
  int steps = 0;
};

struct TrainState {
  std::vector<GaussianPrimitive> model;
  std::vector<MomentPair> opt;  // parallel to model
  int iteration = 0;
  Stage stage = Stage::Sparsity;
  std::vector<MetricsRecord> log;

  PairSet pairs;                    // active geometric-loss pairs
  std::vector<TouchPatch> patches;  // every acquired contact patch

  int next_view = 0;  // round-robin cursor over active RGB views
  std::vector<RgbImage> truth;      // per-camera training-phase targets
  std::vector<int> active_views;    // indices into scene.rgb_cameras
  double scene_extent = 1.0;        // initial model bbox diagonal
  std::mt19937_64 rng;

  // Bookkeeping surfaced in run.json.
  double visual_seconds = 0.0;
  double touch_seconds = 0.0;
  std::size_t spawned = 0;
  std::size_t pruned = 0;
  std::size_t evicted = 0;  // visual slots ceded to contacts at capacity
};

/// Builds the starting model from the four depth cameras under
/// initialization lighting: unproject, transform to world, voxel
/// downsample (voxel = 2x target spacing), then one unlocked isotropic
/// primitive per retained point with opacity 0.5 and color sampled
/// from the nearest RGB camera's render. Caches the training-phase
/// target images. Throws EmptyInitialization when no depth pixel
/// returns.
TrainState initialize(const SceneConfig& scene, const TrainConfig& config);

/// One optimization step: render the next scheduled view, image loss
/// against the cached target, plus the geometric term over the active
/// pair set; backpropagate and apply one adaptive-moment update to
/// every unlocked parameter. Returns the total loss.
double visual_step(TrainState& state, const SceneConfig& scene,
                   const TrainConfig& config);

/// One touch interaction: pick sampling centers by the current stage,
/// acquire contact patches from the probe sampling, prune contradicted
/// visual primitives, spawn locked contact primitives (evicting the
/// faintest visual ones when config.max_gaussians is reached), and
/// rebuild the pair set. Advances Sparsity -> Boundary for good when no
/// dominant gap remains, or when a sparsity event spawns nothing (its
/// targets were already probed, so only boundary repair can add
/// information). No-op when the Boundary stage finds no boundary.
void touch_event(TrainState& state, const SceneConfig& scene,
                 const GroundTruth& probe, const TrainConfig& config);

struct RunResult {
  TrainState state;
  std::vector<MetricsRecord> log;  // copy of state.log
};

/// Full training run: applies config.condition to the pristine scene,
/// samples the ground truth, initializes, then runs `iterations`
/// visual steps with touch events at the configured cadence and
/// metrics at the configured cadence (always including iteration 0 and
/// the final iteration). When `out_dir` is non-empty, writes
/// metrics.csv, model.ply, renders/view_<i>_<iter>.png and run.json
/// there; on an error the partial log is flushed before the exception
/// propagates.
RunResult run(const SceneConfig& scene, const TrainConfig& config,
              const std::string& out_dir = "");

}  // namespace touchsplat
