#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <string>

namespace touchsplat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Tolerance for degeneracy checks (coincident centers, zero directions).
inline constexpr double kDegeneracyEps = 1e-12;

enum class Origin { Visual, Touch };

/// Anisotropic Gaussian scene primitive: an ellipsoid with appearance.
/// Orientation is stored as a unit quaternion and expanded to a rotation
/// matrix on demand; `scales` are the semi-axes (a,b,c) in meters.
struct GaussianPrimitive {
  Vec3 mu = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 scales = Vec3::Ones();
  double opacity = 1.0;  // in (0,1]
  Vec3 color = Vec3::Constant(0.5);
  bool locked = false;  // true => mu/rotation/scales frozen
  Origin origin = Origin::Visual;

  Mat3 rotation_matrix() const {
    return rotation.normalized().toRotationMatrix();
  }

  static GaussianPrimitive sphere(const Vec3& center, double radius) {
    GaussianPrimitive g;
    g.mu = center;
    g.scales = Vec3::Constant(radius);
    return g;
  }
};

/// Checks the type invariants; on failure returns false and, when `why`
/// is non-null, a short description of the first violated condition.
bool satisfies_invariants(const GaussianPrimitive& g, std::string* why = nullptr);

/// Gradient of some scalar objective with respect to one primitive's
/// parameters. `d_rotation` follows Eigen quaternion coefficient order
/// (x, y, z, w) and lies in the tangent space of the unit sphere.
struct GaussianGrads {
  Vec3 d_mu = Vec3::Zero();
  Vec4 d_rotation = Vec4::Zero();
  Vec3 d_scales = Vec3::Zero();
  double d_opacity = 0.0;
  Vec3 d_color = Vec3::Zero();

  GaussianGrads& operator+=(const GaussianGrads& o) {
    d_mu += o.d_mu;
    d_rotation += o.d_rotation;
    d_scales += o.d_scales;
    d_opacity += o.d_opacity;
    d_color += o.d_color;
    return *this;
  }
};

}  // namespace touchsplat
