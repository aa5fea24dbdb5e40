#pragma once

#include "touchsplat/camera.hpp"
#include "touchsplat/mesh.hpp"
#include "touchsplat/types.hpp"

#include <cstdint>
#include <vector>

namespace touchsplat {

struct PointLight {
  Vec3 position = Vec3::Zero();
  double intensity = 1.0;  // radiance scale, inverse-square falloff
};

enum class Condition { None, DeterioratedLight, MissingViews, Occlusion };

/// Initialization runs with the full light rig; Training sees the
/// degraded lights. Occluders are physical objects and block rays in
/// both phases -- the hit classification tells capture-side code which
/// returns came off a block rather than the object.
enum class Phase { Initialization, Training };

struct SceneConfig {
  TriangleMesh object;
  std::vector<CameraModel> rgb_cameras;    // 9: eight on a ring + overhead
  std::vector<CameraModel> depth_cameras;  // 4 at cardinal azimuths
  std::vector<PointLight> init_lights;     // the full evenly spread set
  std::vector<PointLight> train_lights;    // reduced under DeterioratedLight
  std::vector<Aabb> occluders;
  std::vector<bool> active_view_mask;      // per RGB camera
  Vec3 background = Vec3::Constant(0.5);
  double depth_quantum = 1e-3;  // depth discretization, meters
};

/// The undegraded rig around a builtin object: 9 RGB cameras, 4 depth
/// cameras, 9 lights, no occluders, all views active.
SceneConfig make_scene(ObjectKind kind, int image_size = 64);

/// Applies one degradation to a pristine scene: DeterioratedLight
/// keeps a single overhead training light, MissingViews disables the
/// four diagonal ring views, Occlusion inserts three blocks between
/// the cameras and the object. Throws UnknownCondition on a value
/// outside the enum.
SceneConfig apply_condition(const SceneConfig& scene, Condition condition);

/// What a pixel's primary ray hit.
enum class HitKind : std::uint8_t { None = 0, Object = 1, Occluder = 2 };

struct SynthImages {
  RgbImage color;
  DepthImage depth;
  std::vector<HitKind> hit;
};

/// Deterministic ray-cast rendering: rays are parameterized so the ray
/// parameter equals camera-space z, depth is that parameter quantized
/// to the scene's depth quantum, and shading is Lambertian over the
/// phase's lights with inverse-square falloff and no shadows. Pixels
/// that hit nothing get the background color and zero depth.
SynthImages synth_render(const SceneConfig& scene, const CameraModel& cam,
                         Phase phase, int threads = 0);

/// Camera-to-world pose looking from `pos` toward `target`, image y
/// pointing down; `up` breaks the roll ambiguity.
Pose look_at(const Vec3& pos, const Vec3& target, const Vec3& up = {0, 0, 1});

}  // namespace touchsplat
