#include "touchsplat/camera.hpp"

#include "touchsplat/errors.hpp"
#include "touchsplat/geometry.hpp"

namespace touchsplat {

std::vector<Vec3> unproject(const DepthImage& depth, const Intrinsics& intr) {
  std::vector<Vec3> out;
  out.reserve(depth.data.size());
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      const double z = depth.at(u, v);
      if (z > 0.0) out.push_back(unproject(intr, u, v, z));
    }
  return out;
}

ProjectedGaussian project_covariance(const Intrinsics& intr, const Pose& pose,
                                     const GaussianPrimitive& g) {
  const Vec3 p = to_camera(pose, g.mu);
  const double z = p.z();
  if (z <= kZNear)
    throw BehindCamera("project_covariance: gaussian at or behind near plane");

  Eigen::Matrix<double, 2, 3> jac;
  jac << intr.fx / z, 0.0, -intr.fx * p.x() / (z * z),
         0.0, intr.fy / z, -intr.fy * p.y() / (z * z);

  const Mat3 w = pose.r.transpose();
  const Mat3 cov_cam = w * covariance(g) * w.transpose();

  ProjectedGaussian out;
  out.center = {intr.fx * p.x() / z + intr.cx, intr.fy * p.y() / z + intr.cy};
  out.depth = z;
  out.cov = jac * cov_cam * jac.transpose();
  out.cov(0, 0) += kFootprintFloor;
  out.cov(1, 1) += kFootprintFloor;
  return out;
}

}  // namespace touchsplat
