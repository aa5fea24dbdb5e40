#include "touchsplat/scene.hpp"

#include "touchsplat/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <thread>

namespace touchsplat {

namespace {

constexpr double kCameraDistance = 2.5;
constexpr double kLightDistance = 3.0;
constexpr double kRingLightIntensity = 1.1;
constexpr double kOverheadLightIntensity = 1.4;
constexpr double kOccluderAlbedo = 0.35;
constexpr double kRayEps = 1e-9;

Intrinsics make_intrinsics(int size) {
  Intrinsics intr;
  intr.width = intr.height = size;
  intr.fx = intr.fy = 70.0 * size / 64.0;
  intr.cx = intr.cy = (size - 1) / 2.0;
  return intr;
}

CameraModel rig_camera(double azimuth, double elevation, int size) {
  const Vec3 pos = kCameraDistance * Vec3(std::cos(elevation) * std::cos(azimuth),
                                          std::cos(elevation) * std::sin(azimuth),
                                          std::sin(elevation));
  return {make_intrinsics(size), look_at(pos, Vec3::Zero())};
}

}  // namespace

Pose look_at(const Vec3& pos, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - pos).normalized();
  Vec3 right = forward.cross(up);
  if (right.squaredNorm() < 1e-12) {
    right = forward.cross(Vec3(1, 0, 0));
    if (right.squaredNorm() < 1e-12) right = forward.cross(Vec3(0, 1, 0));
  }
  right.normalize();
  Pose pose;
  pose.r.col(0) = right;
  pose.r.col(1) = forward.cross(right);  // image y points down
  pose.r.col(2) = forward;
  pose.t = pos;
  return pose;
}

SceneConfig make_scene(ObjectKind kind, int image_size) {
  SceneConfig scene;
  scene.object = builtin_object(kind);

  const double deg = M_PI / 180.0;
  for (int i = 0; i < 8; ++i)
    scene.rgb_cameras.push_back(rig_camera(45.0 * i * deg, 30.0 * deg, image_size));
  scene.rgb_cameras.push_back(
      {make_intrinsics(image_size), look_at({0, 0, kCameraDistance}, Vec3::Zero())});

  for (int i = 0; i < 4; ++i)
    scene.depth_cameras.push_back(rig_camera(90.0 * i * deg, 20.0 * deg, image_size));

  for (int i = 0; i < 8; ++i) {
    const double az = 45.0 * i * deg, el = 45.0 * deg;
    scene.init_lights.push_back(
        {kLightDistance * Vec3(std::cos(el) * std::cos(az),
                               std::cos(el) * std::sin(az), std::sin(el)),
         kRingLightIntensity});
  }
  scene.init_lights.push_back(
      {{0, 0, kLightDistance}, kOverheadLightIntensity});
  scene.train_lights = scene.init_lights;

  scene.active_view_mask.assign(scene.rgb_cameras.size(), true);
  return scene;
}

SceneConfig apply_condition(const SceneConfig& scene, Condition condition) {
  assert(scene.init_lights.size() == 9 && scene.occluders.empty());
  SceneConfig out = scene;
  switch (condition) {
    case Condition::None:
      break;
    case Condition::DeterioratedLight:
      // Keep only the overhead light for training; initialization
      // still sees the full rig.
      out.train_lights = {scene.init_lights.back()};
      break;
    case Condition::MissingViews:
      // The four diagonal ring views go dark.
      for (int i : {1, 3, 5, 7}) out.active_view_mask[i] = false;
      break;
    case Condition::Occlusion: {
      // Three slabs hug the object just outside its bounding box and
      // screen its lower portion from most of the camera ring; only the
      // overhead and a couple of ring views keep a clean line of sight.
      auto slab = [&out](const Vec3& center, const Vec3& half) {
        Aabb box;
        box.lo = center - half;
        box.hi = center + half;
        out.occluders.push_back(box);
      };
      slab({0.85, 0.0, -0.05}, {0.25, 0.80, 0.40});    // east
      slab({0.0, 0.85, -0.05}, {0.80, 0.25, 0.40});    // north
      slab({-1.0, -1.0, -0.05}, {0.45, 0.45, 0.40});   // southwest corner
      break;
    }
    default:
      throw UnknownCondition("apply_condition: unrecognized condition");
  }
  return out;
}

namespace {

struct RayHit {
  double t = std::numeric_limits<double>::max();
  HitKind kind = HitKind::None;
  Vec3 normal = Vec3::Zero();
  double albedo = 0.0;
};

// Möller-Trumbore with an unnormalized direction; t is in units of the
// direction vector, which the caller sets up so t equals camera z.
bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& v0, const Vec3& v1,
                  const Vec3& v2, double* t_out) {
  const Vec3 e1 = v1 - v0, e2 = v2 - v0;
  const Vec3 pv = d.cross(e2);
  const double det = e1.dot(pv);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = o - v0;
  const double u = tv.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = tv.cross(e1);
  const double v = d.dot(qv) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(qv) * inv;
  if (t <= kRayEps) return false;
  *t_out = t;
  return true;
}

// Slab intersection; reports the entry parameter and the face normal
// at entry.
bool ray_aabb(const Vec3& o, const Vec3& d, const Aabb& box, double* t_out,
              Vec3* normal_out) {
  double t_enter = -std::numeric_limits<double>::max();
  double t_exit = std::numeric_limits<double>::max();
  int enter_axis = 0;
  double enter_sign = 1.0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d(a)) < 1e-14) {
      if (o(a) < box.lo(a) || o(a) > box.hi(a)) return false;
      continue;
    }
    double t0 = (box.lo(a) - o(a)) / d(a);
    double t1 = (box.hi(a) - o(a)) / d(a);
    double sign = -1.0;  // entering through the low face
    if (t0 > t1) {
      std::swap(t0, t1);
      sign = 1.0;
    }
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = a;
      enter_sign = sign;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_enter <= kRayEps) return false;
  *t_out = t_enter;
  *normal_out = Vec3::Zero();
  (*normal_out)(enter_axis) = enter_sign;
  return true;
}

Vec3 shade(const Vec3& point, const Vec3& normal, double albedo,
           const std::vector<PointLight>& lights) {
  double radiance = 0.0;
  for (const PointLight& light : lights) {
    const Vec3 to_light = light.position - point;
    const double d2 = to_light.squaredNorm();
    const double lambert = normal.dot(to_light) / std::sqrt(d2);
    if (lambert > 0.0) radiance += light.intensity * lambert / d2;
  }
  const double v = std::clamp(albedo * radiance, 0.0, 1.0);
  return Vec3::Constant(v);
}

}  // namespace

SynthImages synth_render(const SceneConfig& scene, const CameraModel& cam,
                         Phase phase, int threads) {
  const Intrinsics& intr = cam.intr;
  SynthImages out;
  out.color = RgbImage(intr.width, intr.height, scene.background);
  out.depth = DepthImage(intr.width, intr.height);
  out.hit.assign(out.color.pixel_count(), HitKind::None);

  // Lighting is phase-switched (the capture rig is fully lit), but the
  // occluders are physical objects: they block every phase.
  const std::vector<PointLight>& lights =
      phase == Phase::Initialization ? scene.init_lights : scene.train_lights;

  auto render_rows = [&](int row_begin, int row_end) {
    for (int v = row_begin; v < row_end; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        // Direction scaled so the ray parameter equals camera-space z;
        // quantized depth then unprojects back onto the surface.
        const Vec3 dir = cam.pose.r * Vec3((u - intr.cx) / intr.fx,
                                           (v - intr.cy) / intr.fy, 1.0);
        const Vec3& origin = cam.pose.t;

        RayHit hit;
        for (std::size_t f = 0; f < scene.object.triangles.size(); ++f) {
          const auto& tri = scene.object.triangles[f];
          double t;
          if (ray_triangle(origin, dir, scene.object.vertices[tri[0]],
                           scene.object.vertices[tri[1]],
                           scene.object.vertices[tri[2]], &t) &&
              t < hit.t) {
            hit.t = t;
            hit.kind = HitKind::Object;
            hit.normal = scene.object.face_normals[f];
            hit.albedo = scene.object.face_albedo[f];
          }
        }
        for (const Aabb& box : scene.occluders) {
          double t;
          Vec3 n;
          if (ray_aabb(origin, dir, box, &t, &n) && t < hit.t) {
            hit.t = t;
            hit.kind = HitKind::Occluder;
            hit.normal = n;
            hit.albedo = kOccluderAlbedo;
          }
        }

        const std::size_t pi = std::size_t(v) * intr.width + u;
        if (hit.kind == HitKind::None) continue;
        const double q = scene.depth_quantum;
        const double depth = q > 0.0 ? q * std::round(hit.t / q) : hit.t;
        out.depth.data[pi] = depth;
        out.hit[pi] = hit.kind;
        out.color.px[pi] =
            shade(origin + hit.t * dir, hit.normal, hit.albedo, lights);
      }
    }
  };

  if (threads <= 1) {
    render_rows(0, intr.height);
  } else {
    const int stripes = 8;
    std::vector<std::thread> pool;
    const int workers = std::min(threads, stripes);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int s = w; s < stripes; s += workers)
          render_rows(intr.height * s / stripes,
                      intr.height * (s + 1) / stripes);
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace touchsplat
