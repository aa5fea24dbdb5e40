#pragma once

#include "touchsplat/types.hpp"

#include <vector>

namespace touchsplat {

// Gaussians closer than this to the image plane are rejected rather
// than projected; the affine approximation blows up as z -> 0.
inline constexpr double kZNear = 0.01;

// Screen-space dilation added to both diagonal entries of the projected
// covariance, in px^2. Keeps sub-pixel splats rasterizable.
inline constexpr double kFootprintFloor = 0.3;

struct Intrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
};

/// Camera-to-world rigid transform: p_world = r * p_cam + t.
struct Pose {
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();
};

struct CameraModel {
  Intrinsics intr;
  Pose pose;
};

inline Vec3 to_world(const Pose& pose, const Vec3& p_cam) {
  return pose.r * p_cam + pose.t;
}

inline Vec3 to_camera(const Pose& pose, const Vec3& p_world) {
  return pose.r.transpose() * (p_world - pose.t);
}

/// Pinhole unprojection of pixel (u, v) at depth z, in camera space.
/// Pixel indices map directly onto the continuous image plane; no
/// half-pixel shift is applied anywhere in this codebase.
inline Vec3 unproject(const Intrinsics& intr, int u, int v, double z) {
  return {(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
}

struct DepthImage;

/// Unprojects every pixel with a positive depth, in row-major scan
/// order. Zero-depth (no-return) pixels are skipped.
std::vector<Vec3> unproject(const DepthImage& depth, const Intrinsics& intr);

/// Row-major depth map in meters; 0 means no return.
struct DepthImage {
  int width = 0, height = 0;
  std::vector<double> data;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h, 0.0) {}
  double& at(int u, int v) { return data[std::size_t(v) * width + u]; }
  double at(int u, int v) const { return data[std::size_t(v) * width + u]; }
};

/// Row-major RGB image, linear values in [0,1].
struct RgbImage {
  int width = 0, height = 0;
  std::vector<Vec3> px;

  RgbImage() = default;
  RgbImage(int w, int h, const Vec3& fill = Vec3::Zero())
      : width(w), height(h), px(std::size_t(w) * h, fill) {}
  Vec3& at(int u, int v) { return px[std::size_t(v) * width + u]; }
  const Vec3& at(int u, int v) const { return px[std::size_t(v) * width + u]; }
  std::size_t pixel_count() const { return px.size(); }
};

struct ProjectedGaussian {
  Vec2 center;  // pixel coordinates of the projected mean
  double depth; // camera-space z of the mean
  Mat2 cov;     // screen-space covariance, floor already applied
};

/// EWA-style projection of a world-space Gaussian onto the image:
///   cov = J W Sigma W^T J^T + floor * I
/// with W the world-to-camera rotation and J the perspective Jacobian
/// at the mean. Throws BehindCamera when the mean has z <= kZNear.
ProjectedGaussian project_covariance(const Intrinsics& intr, const Pose& pose,
                                     const GaussianPrimitive& g);

}  // namespace touchsplat
