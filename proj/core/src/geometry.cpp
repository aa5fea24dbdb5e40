#include "touchsplat/geometry.hpp"

#include "touchsplat/errors.hpp"

#include <cmath>

namespace touchsplat {

bool satisfies_invariants(const GaussianPrimitive& g, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!g.mu.allFinite()) return fail("non-finite center");
  if (!g.scales.allFinite() || (g.scales.array() <= 0.0).any())
    return fail("semi-axes must be positive");
  if (!g.rotation.coeffs().allFinite() || g.rotation.norm() <= kDegeneracyEps)
    return fail("degenerate orientation quaternion");
  if (!(g.opacity > 0.0) || g.opacity > 1.0) return fail("opacity outside (0,1]");
  if (!g.color.allFinite() || (g.color.array() < 0.0).any() ||
      (g.color.array() > 1.0).any())
    return fail("color outside [0,1]");
  return true;
}

Mat3 covariance(const GaussianPrimitive& g) {
  const Mat3 r = g.rotation_matrix();
  return r * g.scales.array().square().matrix().asDiagonal() * r.transpose();
}

EllipsoidMatrix ellipsoid_matrix(const GaussianPrimitive& g) {
  const Mat3 r = g.rotation_matrix();
  const Vec3 inv_sq = g.scales.array().square().inverse();
  Mat3 m = r * inv_sq.asDiagonal() * r.transpose();
  // Floating-point round-off can leave m slightly asymmetric; the
  // quadratic form must not depend on the sign of v.
  EllipsoidMatrix em;
  em.m = 0.5 * (m + m.transpose());
  return em;
}

double directional_radius(const EllipsoidMatrix& em, const Vec3& v) {
  const double n = v.norm();
  if (n <= kDegeneracyEps)
    throw DegenerateDirection("directional_radius: zero-length direction");
  const Vec3 vh = v / n;
  const double q = vh.dot(em.m * vh);
  return 1.0 / std::sqrt(q);
}

double directional_radius(const GaussianPrimitive& g, const Vec3& v) {
  return directional_radius(ellipsoid_matrix(g), v);
}

double pair_gap(const GaussianPrimitive& gi, const GaussianPrimitive& gj) {
  const Vec3 d = gj.mu - gi.mu;
  const double n = d.norm();
  if (n <= kDegeneracyEps)
    throw CoincidentCenters("pair_gap: coincident centers");
  return n - directional_radius(gi, d) - directional_radius(gj, d);
}

Vec4 rotation_grad_to_quat(const Quat& q, const Mat3& d_r) {
  const double nq = q.norm();
  const Quat qh = q.normalized();
  const double x = qh.x(), y = qh.y(), z = qh.z(), w = qh.w();

  Mat3 dx, dy, dz, dw;
  dx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  dy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  dz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  dw << 0, -z, y, z, 0, -x, -y, x, 0;

  Vec4 g_unit;
  g_unit << 2.0 * d_r.cwiseProduct(dx).sum(), 2.0 * d_r.cwiseProduct(dy).sum(),
      2.0 * d_r.cwiseProduct(dz).sum(), 2.0 * d_r.cwiseProduct(dw).sum();

  // Pull back through q_hat = q / |q|.
  const Vec4 qc = qh.coeffs();
  return (g_unit - qc * qc.dot(g_unit)) / nq;
}

namespace {

// Gradient of the directional radius r = (v_hat^T M v_hat)^(-1/2) with
// respect to the unnormalized direction v, plus the pieces needed to
// chain into M's parameters.
struct RadiusDiff {
  double r;
  Vec3 d_v;     // dr/dv
  Mat3 d_m;     // dr/dM (symmetric)
};

RadiusDiff radius_diff(const Mat3& m, const Vec3& v) {
  const double n = v.norm();
  const Vec3 vh = v / n;
  const Vec3 mv = m * vh;
  const double q = vh.dot(mv);
  const double r = 1.0 / std::sqrt(q);
  const double q32 = r / q;  // q^(-3/2)

  RadiusDiff out;
  out.r = r;
  // dr/dv_hat = -q^(-3/2) M v_hat, then project through v_hat = v/|v|.
  const Vec3 d_vh = -q32 * mv;
  out.d_v = (d_vh - vh * vh.dot(d_vh)) / n;
  out.d_m = -0.5 * q32 * (vh * vh.transpose());
  return out;
}

// Chains dL/dM into rotation and semi-axes for M = R diag(s^-2) R^T.
void chain_m(const GaussianPrimitive& g, const Mat3& d_m, double coeff,
             Vec4* d_rot, Vec3* d_scales) {
  const Mat3 r = g.rotation_matrix();
  const Mat3 g_sym = coeff * 0.5 * (d_m + d_m.transpose());
  const Vec3 inv_sq = g.scales.array().square().inverse();
  const Mat3 d_r = 2.0 * g_sym * r * inv_sq.asDiagonal();
  *d_rot = rotation_grad_to_quat(g.rotation, d_r);
  const Mat3 rtgr = r.transpose() * g_sym * r;
  for (int k = 0; k < 3; ++k)
    (*d_scales)(k) = rtgr(k, k) * (-2.0 / std::pow(g.scales(k), 3));
}

}  // namespace

PairGapGrads pair_gap_grads(const GaussianPrimitive& gi, const GaussianPrimitive& gj) {
  const Vec3 v = gj.mu - gi.mu;
  const double n = v.norm();
  if (n <= kDegeneracyEps)
    throw CoincidentCenters("pair_gap_grads: coincident centers");

  const Mat3 mi = ellipsoid_matrix(gi).m;
  const Mat3 mj = ellipsoid_matrix(gj).m;
  const RadiusDiff ri = radius_diff(mi, v);
  const RadiusDiff rj = radius_diff(mj, v);

  PairGapGrads out;
  out.gap = n - ri.r - rj.r;
  // gap = |v| - r_i(v) - r_j(v), v = mu_j - mu_i.
  const Vec3 d_v = v / n - ri.d_v - rj.d_v;
  out.d_mu_j = d_v;
  out.d_mu_i = -d_v;
  chain_m(gi, ri.d_m, -1.0, &out.d_rot_i, &out.d_scales_i);
  chain_m(gj, rj.d_m, -1.0, &out.d_rot_j, &out.d_scales_j);
  return out;
}

}  // namespace touchsplat
