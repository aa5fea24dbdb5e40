#pragma once

#include "touchsplat/types.hpp"

namespace touchsplat {

/// Inverse-covariance form of a primitive's ellipsoid:
///   M = R diag(a^-2, b^-2, c^-2) R^T.
/// Points x with (x - mu)^T M (x - mu) = 1 lie on the ellipsoid surface.
struct EllipsoidMatrix {
  Mat3 m = Mat3::Identity();
};

/// World-space covariance Sigma = R diag(a^2, b^2, c^2) R^T.
Mat3 covariance(const GaussianPrimitive& g);

/// Builds M from the primitive's rotation and semi-axes. The result is
/// explicitly symmetrized so downstream quadratic forms are exact for
/// v and -v.
EllipsoidMatrix ellipsoid_matrix(const GaussianPrimitive& g);

/// Extent of the ellipsoid along direction v, measured from its center:
/// r = 1 / sqrt(v_hat^T M v_hat) with v_hat = v / |v|.
/// Throws DegenerateDirection if |v| <= kDegeneracyEps.
double directional_radius(const GaussianPrimitive& g, const Vec3& v);
double directional_radius(const EllipsoidMatrix& em, const Vec3& v);

/// Signed surface separation of two primitives along their center line:
///   gap = |mu_j - mu_i| - r_i - r_j
/// where each radius is taken along the (normalized) center offset.
/// Negative values mean the surfaces interpenetrate along that line.
/// Throws CoincidentCenters if the centers are closer than kDegeneracyEps.
double pair_gap(const GaussianPrimitive& gi, const GaussianPrimitive& gj);

/// Analytic gradients of pair_gap with respect to both primitives'
/// centers, orientations and semi-axes. Quaternion gradients are in
/// coefficient order (x, y, z, w), projected to the unit-sphere tangent.
struct PairGapGrads {
  double gap = 0.0;
  Vec3 d_mu_i = Vec3::Zero();
  Vec3 d_mu_j = Vec3::Zero();
  Vec4 d_rot_i = Vec4::Zero();
  Vec4 d_rot_j = Vec4::Zero();
  Vec3 d_scales_i = Vec3::Zero();
  Vec3 d_scales_j = Vec3::Zero();
};

PairGapGrads pair_gap_grads(const GaussianPrimitive& gi, const GaussianPrimitive& gj);

/// d(vec R)/d(q_hat) contracted against dL/dR, then pulled back through
/// quaternion normalization. Input `d_r` is dL/dR for R = R(q/|q|);
/// output is dL/dq in coefficient order (x, y, z, w). Shared by every
/// module that backpropagates through rotation_matrix().
Vec4 rotation_grad_to_quat(const Quat& q, const Mat3& d_r);

}  // namespace touchsplat
