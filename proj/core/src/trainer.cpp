#include "touchsplat/trainer.hpp"

#include "touchsplat/errors.hpp"
#include "touchsplat/image_io.hpp"
#include "touchsplat/kdtree.hpp"
#include "touchsplat/marching.hpp"
#include "touchsplat/mesh_io.hpp"
#include "touchsplat/render.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

namespace touchsplat {

namespace {

using nlohmann::json;

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kScaleFloor = 1e-4;
constexpr double kOpacityFloor = 0.005;
constexpr double kOpacityCeil = 0.99;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double upper_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::None: return "none";
    case Condition::DeterioratedLight: return "light";
    case Condition::MissingViews: return "views";
    case Condition::Occlusion: return "occlusion";
  }
  throw UnknownCondition("condition_name: invalid condition value");
}

Condition condition_from_name(const std::string& name) {
  if (name == "none") return Condition::None;
  if (name == "light") return Condition::DeterioratedLight;
  if (name == "views") return Condition::MissingViews;
  if (name == "occlusion") return Condition::Occlusion;
  throw UnknownCondition("unknown condition '" + name +
                         "' (expected none|light|views|occlusion)");
}

namespace {

const char* eval_points_name(ReconPointSet k) {
  return k == ReconPointSet::Centers ? "centers" : "surface";
}

ReconPointSet eval_points_from_name(const std::string& name) {
  if (name == "centers") return ReconPointSet::Centers;
  if (name == "surface") return ReconPointSet::OpacityWeightedSurface;
  throw Error("unknown eval_points '" + name + "' (expected centers|surface)");
}

template <typename T>
void take(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).template get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const char* where) {
  for (const auto& item : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return item.key() == k;
        }) == known.end())
      throw Error(std::string("config: unknown key '") + item.key() + "' in " +
                  where);
  }
}

}  // namespace

std::string config_to_json(const TrainConfig& c) {
  json j;
  j["iterations"] = c.iterations;
  j["seed"] = c.seed;
  j["condition"] = condition_name(c.condition);
  j["image_size"] = c.image_size;
  j["threads"] = c.threads;
  j["random_views"] = c.random_views;
  j["learning_rates"] = {{"mu", c.lr.mu},
                         {"quaternion", c.lr.quaternion},
                         {"scales", c.lr.scales},
                         {"opacity", c.lr.opacity},
                         {"color", c.lr.color}};
  j["loss"] = {{"lambda_ssim", c.loss.lambda_ssim},
               {"lambda_touch", c.loss.lambda_touch},
               {"neighbor_count", c.loss.neighbor_count}};
  j["touch"] = {{"enabled", c.touch_enabled},
                {"cadence", c.touch_cadence},
                {"patches_per_event", c.patches_per_event},
                {"points_per_patch", c.points_per_patch},
                {"samples", c.touch_samples},
                {"proxy_grid", c.proxy_grid},
                {"stage_switch_ratio", c.stage_switch_ratio},
                {"coverage_radius_scale", c.coverage_radius_scale},
                {"boundary_angle_deg", c.boundary_angle_deg}};
  j["metrics"] = {{"cadence", c.metric_cadence},
                  {"ground_truth_samples", c.ground_truth_samples},
                  {"jsd_grid", c.jsd_grid},
                  {"fscore_tau", c.fscore_tau},
                  {"eval_points", eval_points_name(c.eval_points)},
                  {"surface_samples", c.surface_samples}};
  j["model"] = {{"max_gaussians", c.max_gaussians},
                {"init_target_spacing", c.init_target_spacing}};
  j["render"] = {{"views", c.render_views}, {"cadence", c.render_cadence}};
  return j.dump(2) + "\n";
}

TrainConfig merge_config(const TrainConfig& base, const std::string& text) {
  TrainConfig c = base;
  json j = json::parse(text);
  reject_unknown(j,
                 {"iterations", "seed", "condition", "image_size", "threads",
                  "random_views", "learning_rates", "loss", "touch", "metrics",
                  "model", "render"},
                 "top level");
  take(j, "iterations", c.iterations);
  take(j, "seed", c.seed);
  if (j.contains("condition"))
    c.condition = condition_from_name(j.at("condition").get<std::string>());
  take(j, "image_size", c.image_size);
  take(j, "threads", c.threads);
  take(j, "random_views", c.random_views);
  if (j.contains("learning_rates")) {
    const json& s = j.at("learning_rates");
    reject_unknown(s, {"mu", "quaternion", "scales", "opacity", "color"},
                   "learning_rates");
    take(s, "mu", c.lr.mu);
    take(s, "quaternion", c.lr.quaternion);
    take(s, "scales", c.lr.scales);
    take(s, "opacity", c.lr.opacity);
    take(s, "color", c.lr.color);
  }
  if (j.contains("loss")) {
    const json& s = j.at("loss");
    reject_unknown(s, {"lambda_ssim", "lambda_touch", "neighbor_count"},
                   "loss");
    take(s, "lambda_ssim", c.loss.lambda_ssim);
    take(s, "lambda_touch", c.loss.lambda_touch);
    take(s, "neighbor_count", c.loss.neighbor_count);
  }
  if (j.contains("touch")) {
    const json& s = j.at("touch");
    reject_unknown(s,
                   {"enabled", "cadence", "patches_per_event",
                    "points_per_patch", "samples", "proxy_grid",
                    "stage_switch_ratio", "coverage_radius_scale",
                    "boundary_angle_deg"},
                   "touch");
    take(s, "enabled", c.touch_enabled);
    take(s, "cadence", c.touch_cadence);
    take(s, "patches_per_event", c.patches_per_event);
    take(s, "points_per_patch", c.points_per_patch);
    take(s, "samples", c.touch_samples);
    take(s, "proxy_grid", c.proxy_grid);
    take(s, "stage_switch_ratio", c.stage_switch_ratio);
    take(s, "coverage_radius_scale", c.coverage_radius_scale);
    take(s, "boundary_angle_deg", c.boundary_angle_deg);
  }
  if (j.contains("metrics")) {
    const json& s = j.at("metrics");
    reject_unknown(s,
                   {"cadence", "ground_truth_samples", "jsd_grid", "fscore_tau",
                    "eval_points", "surface_samples"},
                   "metrics");
    take(s, "cadence", c.metric_cadence);
    take(s, "ground_truth_samples", c.ground_truth_samples);
    take(s, "jsd_grid", c.jsd_grid);
    take(s, "fscore_tau", c.fscore_tau);
    if (s.contains("eval_points"))
      c.eval_points =
          eval_points_from_name(s.at("eval_points").get<std::string>());
    take(s, "surface_samples", c.surface_samples);
  }
  if (j.contains("model")) {
    const json& s = j.at("model");
    reject_unknown(s, {"max_gaussians", "init_target_spacing"}, "model");
    take(s, "max_gaussians", c.max_gaussians);
    take(s, "init_target_spacing", c.init_target_spacing);
  }
  if (j.contains("render")) {
    const json& s = j.at("render");
    reject_unknown(s, {"views", "cadence"}, "render");
    take(s, "views", c.render_views);
    take(s, "cadence", c.render_cadence);
  }
  return c;
}

TrainConfig config_from_json(const std::string& text) {
  return merge_config(TrainConfig{}, text);
}

namespace {

void validate(const TrainConfig& c) {
  if (c.iterations < 0) throw Error("config: iterations must be >= 0");
  if (c.lr.mu <= 0 || c.lr.quaternion <= 0 || c.lr.scales <= 0 ||
      c.lr.opacity <= 0 || c.lr.color <= 0)
    throw Error("config: learning rates must be positive");
  if (c.touch_cadence < 1) throw Error("config: touch cadence must be >= 1");
  if (c.metric_cadence < 1) throw Error("config: metric cadence must be >= 1");
  if (c.patches_per_event < 1 || c.points_per_patch < 1)
    throw Error("config: patch counts must be >= 1");
  if (c.touch_enabled && c.touch_samples < std::size_t(c.points_per_patch))
    throw Error("config: touch samples must cover at least one patch");
  if (c.image_size < 8) throw Error("config: image_size must be >= 8");
}

// Training-phase target image for one RGB camera.
RgbImage target_image(const SceneConfig& scene, int view, int threads) {
  return synth_render(scene, scene.rgb_cameras[std::size_t(view)],
                      Phase::Training, threads)
      .color;
}

}  // namespace

TrainState initialize(const SceneConfig& scene, const TrainConfig& config) {
  TrainState state;
  state.rng.seed(config.seed);

  // Depth capture under the full initialization rig.
  std::vector<Vec3> cloud;
  for (const CameraModel& cam : scene.depth_cameras) {
    SynthImages shot =
        synth_render(scene, cam, Phase::Initialization, config.threads);
    // A depth return from an occluder is not the object; capture-side
    // segmentation drops the pixel instead of seeding geometry on a
    // block. Occluded regions simply stay uninitialized.
    for (std::size_t i = 0; i < shot.hit.size(); ++i)
      if (shot.hit[i] == HitKind::Occluder) shot.depth.data[i] = 0.0;
    for (const Vec3& p : unproject(shot.depth, cam.intr))
      cloud.push_back(to_world(cam.pose, p));
  }
  if (cloud.empty())
    throw EmptyInitialization("initialize: no depth returns from any camera");

  // Voxel downsample: keep, per voxel, the point nearest the voxel
  // center (ties to the first-seen). Sorted-key iteration fixes the
  // output order independent of hashing.
  const double voxel = 2.0 * config.init_target_spacing;
  Vec3 lo = cloud.front();
  for (const Vec3& p : cloud) lo = lo.cwiseMin(p);
  std::map<std::array<std::int64_t, 3>, std::pair<double, std::size_t>> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 rel = (cloud[i] - lo) / voxel;
    const std::array<std::int64_t, 3> key = {std::int64_t(std::floor(rel.x())),
                                             std::int64_t(std::floor(rel.y())),
                                             std::int64_t(std::floor(rel.z()))};
    const Vec3 center =
        lo + voxel * Vec3(key[0] + 0.5, key[1] + 0.5, key[2] + 0.5);
    const double d2 = (cloud[i] - center).squaredNorm();
    auto [it, inserted] = cells.try_emplace(key, d2, i);
    if (!inserted && d2 < it->second.first) it->second = {d2, i};
  }
  std::vector<Vec3> retained;
  retained.reserve(cells.size());
  for (const auto& [key, best] : cells) retained.push_back(cloud[best.second]);

  // Local spacing from the retained set itself.
  std::vector<double> spacing(retained.size(), config.init_target_spacing);
  if (retained.size() >= 2) {
    const SpatialIndex index(retained);
    for (std::size_t i = 0; i < retained.size(); ++i)
      spacing[i] = index.nearest(retained[i], 2).back().distance;
  }

  // Color lookup renders under full lighting. Occluder pixels carry the
  // block's depth, so the agreement test below never samples them.
  std::vector<SynthImages> rgb_shots;
  rgb_shots.reserve(scene.rgb_cameras.size());
  for (const CameraModel& cam : scene.rgb_cameras)
    rgb_shots.push_back(
        synth_render(scene, cam, Phase::Initialization, config.threads));

  auto sample_color = [&](const Vec3& p) -> Vec3 {
    // Cameras ordered by distance; first one that sees the point
    // (projects in bounds, agrees with its depth map) wins.
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t v = 0; v < scene.rgb_cameras.size(); ++v)
      order.emplace_back((p - scene.rgb_cameras[v].pose.t).squaredNorm(), v);
    std::sort(order.begin(), order.end());
    for (const auto& [d2, v] : order) {
      const CameraModel& cam = scene.rgb_cameras[v];
      const Vec3 pc = to_camera(cam.pose, p);
      if (pc.z() <= kZNear) continue;
      const int u = int(std::lround(cam.intr.fx * pc.x() / pc.z() + cam.intr.cx));
      const int w = int(std::lround(cam.intr.fy * pc.y() / pc.z() + cam.intr.cy));
      if (u < 0 || u >= cam.intr.width || w < 0 || w >= cam.intr.height)
        continue;
      const double depth = rgb_shots[v].depth.at(u, w);
      if (depth <= 0.0 ||
          std::abs(depth - pc.z()) > 3.0 * scene.depth_quantum)
        continue;
      return rgb_shots[v].color.at(u, w);
    }
    return scene.background;
  };

  state.model.reserve(retained.size());
  for (std::size_t i = 0; i < retained.size(); ++i) {
    GaussianPrimitive g;
    g.mu = retained[i];
    g.scales = Vec3::Constant(std::max(spacing[i], kScaleFloor));
    g.opacity = 0.5;
    g.color = sample_color(retained[i]);
    g.locked = false;
    g.origin = Origin::Visual;
    state.model.push_back(g);
  }
  state.opt.assign(state.model.size(), MomentPair{});

  Aabb box;
  for (const Vec3& p : retained) box.expand(p);
  state.scene_extent = std::max(box.diagonal(), voxel);

  for (std::size_t v = 0; v < scene.active_view_mask.size(); ++v)
    if (scene.active_view_mask[v]) state.active_views.push_back(int(v));
  state.truth.resize(scene.rgb_cameras.size());
  for (int v : state.active_views)
    state.truth[std::size_t(v)] = target_image(scene, v, config.threads);

  return state;
}

namespace {

void adam_axpy(double& param, double grad, double& m1, double& m2, double lr,
               int step) {
  m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
  m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad * grad;
  const double mh = m1 / (1.0 - std::pow(kBeta1, step));
  const double vh = m2 / (1.0 - std::pow(kBeta2, step));
  param -= lr * mh / (std::sqrt(vh) + kAdamEps);
}

void apply_update(GaussianPrimitive& g, MomentPair& opt,
                  const GaussianGrads& grad, const LearningRates& lr,
                  double extent) {
  const int step = ++opt.steps;
  if (!g.locked) {
    for (int k = 0; k < 3; ++k)
      adam_axpy(g.mu(k), grad.d_mu(k), opt.m1.d_mu(k), opt.m2.d_mu(k),
                lr.mu * extent, step);
    for (int k = 0; k < 4; ++k)
      adam_axpy(g.rotation.coeffs()(k), grad.d_rotation(k),
                opt.m1.d_rotation(k), opt.m2.d_rotation(k), lr.quaternion,
                step);
    for (int k = 0; k < 3; ++k)
      adam_axpy(g.scales(k), grad.d_scales(k), opt.m1.d_scales(k),
                opt.m2.d_scales(k), lr.scales, step);
    g.scales = g.scales.cwiseMax(kScaleFloor);
    // Renormalize only on measurable drift so a zero-gradient step is a
    // bitwise no-op.
    if (std::abs(g.rotation.coeffs().squaredNorm() - 1.0) > 1e-12)
      g.rotation.normalize();
  }
  adam_axpy(g.opacity, grad.d_opacity, opt.m1.d_opacity, opt.m2.d_opacity,
            lr.opacity, step);
  g.opacity = std::clamp(g.opacity, kOpacityFloor, kOpacityCeil);
  for (int k = 0; k < 3; ++k)
    adam_axpy(g.color(k), grad.d_color(k), opt.m1.d_color(k),
              opt.m2.d_color(k), lr.color, step);
  g.color = g.color.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

double visual_step(TrainState& state, const SceneConfig& scene,
                   const TrainConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (state.active_views.empty())
    throw Error("visual_step: no active views to train on");

  int slot;
  if (config.random_views) {
    slot = int(state.rng() % state.active_views.size());
  } else {
    slot = state.next_view;
    state.next_view = (state.next_view + 1) % int(state.active_views.size());
  }
  const int view = state.active_views[std::size_t(slot)];
  const CameraModel& cam = scene.rgb_cameras[std::size_t(view)];

  RenderOptions opts;
  opts.background = scene.background;
  opts.threads = config.threads;
  const RenderResult fwd = render(state.model, cam.intr, cam.pose, opts);
  const ImageLossResult il =
      image_loss(fwd.color, state.truth[std::size_t(view)], config.loss);
  std::vector<GaussianGrads> grads =
      render_backward(state.model, fwd, il.grad, opts);

  double touch_part = 0.0;
  if (!state.pairs.pairs.empty()) {
    const TouchLossResult tl = touch_loss(state.model, state.pairs);
    touch_part = tl.loss;
    for (std::size_t i = 0; i < grads.size(); ++i) {
      GaussianGrads scaled = tl.grads[i];
      scaled.d_mu *= config.loss.lambda_touch;
      scaled.d_rotation *= config.loss.lambda_touch;
      scaled.d_scales *= config.loss.lambda_touch;
      scaled.d_opacity *= config.loss.lambda_touch;
      scaled.d_color *= config.loss.lambda_touch;
      grads[i] += scaled;
    }
  }

  // Position steps anneal exponentially to 1% of their starting size by
  // the final iteration, per the splatting-optimizer schedule the other
  // rates come from: geometry settles while appearance keeps adapting.
  LearningRates lr = config.lr;
  if (config.iterations > 0)
    lr.mu *= std::pow(0.01, double(state.iteration) / config.iterations);

  for (std::size_t i = 0; i < state.model.size(); ++i)
    apply_update(state.model[i], state.opt[i], grads[i], lr,
                 state.scene_extent);

  ++state.iteration;
  state.visual_seconds += seconds_since(t0);
  return total_loss(il.loss, touch_part, config.loss);
}

namespace {

// Median nearest-neighbor spacing of the ground-truth samples; sets
// the greedy coverage radius scale-relatively.
double ground_truth_spacing(const GroundTruth& gt) {
  const SpatialIndex index(gt.points);
  std::vector<double> d(gt.points.size());
  for (std::size_t i = 0; i < gt.points.size(); ++i)
    d[i] = index.nearest(gt.points[i], 2).back().distance;
  return upper_median(std::move(d));
}

void rebuild_pairs(TrainState& state, const LossWeights& w) {
  state.pairs.pairs.clear();
  std::vector<Vec3> touch_centers;
  for (const GaussianPrimitive& g : state.model)
    if (g.origin == Origin::Touch) touch_centers.push_back(g.mu);
  if (touch_centers.size() < 2 || state.patches.empty()) return;

  std::vector<double> spacings;
  spacings.reserve(state.patches.size());
  for (const TouchPatch& p : state.patches)
    spacings.push_back(median_patch_spacing(p));
  const double reach = 2.0 * upper_median(std::move(spacings));

  const SpatialIndex touch_index(touch_centers);
  std::vector<bool> region(state.model.size(), false);
  for (std::size_t i = 0; i < state.model.size(); ++i) {
    const GaussianPrimitive& g = state.model[i];
    region[i] = g.origin == Origin::Touch ||
                touch_index.nearest(g.mu, 1).front().distance <= reach;
  }
  state.pairs = build_pair_set(state.model, region, w.neighbor_count);
}

}  // namespace

void touch_event(TrainState& state, const SceneConfig& scene,
                 const GroundTruth& probe, const TrainConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t spawned_before = state.spawned;

  // Stage transition is monotone: once the largest gap is unremarkable,
  // sampling switches to boundary repair for good.
  if (state.stage == Stage::Sparsity && state.model.size() >= 2) {
    std::vector<double> gaps = nn_gap(state.model);
    const double largest = *std::max_element(gaps.begin(), gaps.end());
    if (largest < config.stage_switch_ratio * upper_median(std::move(gaps)))
      state.stage = Stage::Boundary;
  }

  std::vector<Vec3> centers;
  if (state.stage == Stage::Sparsity) {
    centers = select_sparse_centers(state.model,
                                    std::size_t(config.patches_per_event));
  } else {
    const TriangleMesh proxy =
        build_proxy_mesh(state.model, config.proxy_grid);
    BoundarySet boundary = extract_boundary(proxy, config.boundary_angle_deg);
    if (boundary.points.empty()) {
      // Converged closed proxy: nothing to probe this event.
      state.touch_seconds += seconds_since(t0);
      return;
    }
    const double radius =
        config.coverage_radius_scale * ground_truth_spacing(probe);
    centers = greedy_cover(boundary, radius,
                           std::size_t(config.patches_per_event));
  }

  const SpatialIndex probe_index(probe.points);
  std::vector<TouchPatch> acquired;
  acquired.reserve(centers.size());
  for (const Vec3& c : centers)
    acquired.push_back(acquire_patch(probe, probe_index, c,
                                     std::size_t(config.points_per_patch)));

  // Prune against every new patch first, then spawn; a probe must not
  // delete the contacts it just confirmed.
  for (const TouchPatch& patch : acquired) {
    const double threshold = patch_bounding_radius(patch);
    const std::vector<std::size_t> removed =
        prune_contradicted(state.model, patch, threshold);
    for (auto it = removed.rbegin(); it != removed.rend(); ++it)
      state.opt.erase(state.opt.begin() + std::ptrdiff_t(*it));
    state.pruned += removed.size();
  }

  // At capacity a confirmed contact outranks unconfirmed photometric
  // evidence: the faintest visual primitive cedes its slot. Only when no
  // visual primitives remain does the model stop growing.
  auto evict_weakest_visual = [&state]() -> bool {
    std::size_t weakest = state.model.size();
    for (std::size_t i = 0; i < state.model.size(); ++i) {
      const GaussianPrimitive& g = state.model[i];
      if (g.origin != Origin::Visual) continue;
      if (weakest == state.model.size() ||
          g.opacity < state.model[weakest].opacity)
        weakest = i;
    }
    if (weakest == state.model.size()) return false;
    state.model.erase(state.model.begin() + std::ptrdiff_t(weakest));
    state.opt.erase(state.opt.begin() + std::ptrdiff_t(weakest));
    ++state.evicted;
    return true;
  };

  for (const TouchPatch& patch : acquired) {
    std::vector<GaussianPrimitive> spawned =
        spawn_touch_gaussians(patch, state.model, scene.background);
    for (GaussianPrimitive& g : spawned) {
      if (state.model.size() >= config.max_gaussians &&
          !evict_weakest_visual())
        break;
      state.model.push_back(std::move(g));
      state.opt.push_back(MomentPair{});
      ++state.spawned;
    }
    state.patches.push_back(patch);
  }

  // A sparsity event that spawned nothing found only fully probed
  // neighborhoods: the remaining gaps carry no new information at the
  // sensor's resolution, so boundary repair takes over for good.
  if (state.stage == Stage::Sparsity && state.spawned == spawned_before)
    state.stage = Stage::Boundary;

  rebuild_pairs(state, config.loss);
  state.touch_seconds += seconds_since(t0);
}

namespace {

MetricsRecord measure(const TrainState& state, const GroundTruth& gt,
                      const TrainConfig& config, double tau) {
  const std::vector<Vec3> recon = reconstruction_points(
      state.model, config.eval_points, config.surface_samples, config.seed);
  MetricsRecord r;
  r.iteration = state.iteration;
  r.cd_mm = chamfer(recon, gt.points);
  r.fscore_pct = fscore(recon, gt.points, tau);
  r.jsd = jsd(recon, gt.points, config.jsd_grid);
  return r;
}

void export_views(const TrainState& state, const SceneConfig& scene,
                  const TrainConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(out_dir) / "renders";
  fs::create_directories(dir);
  RenderOptions opts;
  opts.background = scene.background;
  opts.threads = config.threads;
  for (int v : config.render_views) {
    if (v < 0 || v >= int(scene.rgb_cameras.size())) continue;
    const CameraModel& cam = scene.rgb_cameras[std::size_t(v)];
    const RenderResult fwd = render(state.model, cam.intr, cam.pose, opts);
    const std::string name =
        "view_" + std::to_string(v) + "_" + std::to_string(state.iteration) +
        ".png";
    write_png((dir / name).string(), fwd.color);
  }
}

void flush_outputs(const TrainState& state, const TrainConfig& config,
                   const std::string& out_dir, const std::string& abort_reason) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), state.log);
  if (!state.model.empty())
    write_ply_model((fs::path(out_dir) / "model.ply").string(), state.model);

  json j;
  j["config"] = json::parse(config_to_json(config));
  json run;
  run["iterations_completed"] = state.iteration;
  run["gaussians"] = state.model.size();
  run["spawned"] = state.spawned;
  run["pruned"] = state.pruned;
  run["evicted"] = state.evicted;
  run["final_stage"] =
      state.stage == Stage::Sparsity ? "sparsity" : "boundary";
  run["visual_seconds"] = state.visual_seconds;
  run["touch_seconds"] = state.touch_seconds;
  if (!abort_reason.empty()) run["aborted"] = abort_reason;
  j["run"] = run;
  std::ofstream f((fs::path(out_dir) / "run.json").string(),
                  std::ios::binary);
  const std::string body = j.dump(2) + "\n";
  f.write(body.data(), std::streamsize(body.size()));
}

}  // namespace

RunResult run(const SceneConfig& scene, const TrainConfig& config,
              const std::string& out_dir) {
  validate(config);
  const SceneConfig degraded = apply_condition(scene, config.condition);
  const GroundTruth gt =
      sample_surface(degraded.object, config.ground_truth_samples, config.seed);
  const double tau =
      config.fscore_tau > 0.0 ? config.fscore_tau : default_fscore_tau(gt.points);
  // The probe resamples the same surface at sensor resolution; with a
  // shared seed its points are a prefix of the evaluation sampling.
  const GroundTruth probe =
      config.touch_enabled
          ? sample_surface(degraded.object, config.touch_samples, config.seed)
          : GroundTruth{};

  TrainState state = initialize(degraded, config);
  auto record = [&] { state.log.push_back(measure(state, gt, config, tau)); };

  try {
    record();  // iteration 0
    for (int it = 1; it <= config.iterations; ++it) {
      if (config.touch_enabled && it % config.touch_cadence == 0)
        touch_event(state, degraded, probe, config);
      visual_step(state, degraded, config);
      if (it % config.metric_cadence == 0) record();
      if (!out_dir.empty() && config.render_cadence > 0 &&
          it % config.render_cadence == 0)
        export_views(state, degraded, config, out_dir);
    }
    if (config.iterations % config.metric_cadence != 0 &&
        config.iterations > 0)
      record();
  } catch (...) {
    if (!out_dir.empty()) flush_outputs(state, config, out_dir, "error");
    throw;
  }

  if (!out_dir.empty()) {
    flush_outputs(state, config, out_dir, "");
    export_views(state, degraded, config, out_dir);
  }

  RunResult result;
  result.log = state.log;
  result.state = std::move(state);
  return result;
}

}  // namespace touchsplat
