#include <doctest.h>

#include <touchsplat/errors.hpp>
#include <touchsplat/geometry.hpp>

#include <cmath>
#include <random>

using namespace touchsplat;

namespace {

GaussianPrimitive make(const Vec3& mu, const Quat& q, const Vec3& s) {
  GaussianPrimitive g;
  g.mu = mu;
  g.rotation = q;
  g.scales = s;
  return g;
}

Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Quat q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

Vec3 random_dir(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

// Independent oracle: walk outward from the center along v until the
// ellipsoid quadratic form crosses 1, then bisect.
double ray_march_radius(const GaussianPrimitive& g, const Vec3& v) {
  const Mat3 m = ellipsoid_matrix(g).m;
  const Vec3 d = v.normalized();
  auto form = [&](double t) { return (t * d).dot(m * (t * d)); };
  double hi = 1e-3;
  while (form(hi) < 1.0) hi *= 2.0;
  double lo = hi * 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (form(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("covariance of an axis-rotated ellipsoid permutes the axes") {
  // 90 degrees about z maps the long x-axis onto y.
  const Quat q(Eigen::AngleAxisd(M_PI / 2.0, Vec3::UnitZ()));
  const Mat3 cov = covariance(make(Vec3::Zero(), q, {2, 1, 1}));
  Mat3 expected = Vec3(1, 4, 1).asDiagonal();
  CHECK((cov - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("directional radius on a sphere is the radius in any direction") {
  std::mt19937_64 rng(7);
  const GaussianPrimitive g = GaussianPrimitive::sphere({0, 0, 0}, 0.7);
  for (int i = 0; i < 20; ++i)
    CHECK(directional_radius(g, random_dir(rng)) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("directional radius frozen examples") {
  const GaussianPrimitive g = make(Vec3::Zero(), Quat::Identity(), {2, 1, 1});
  CHECK(directional_radius(g, {1, 0, 0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(directional_radius(g, {0, 1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  // Along (1,1,0): 1/sqrt(0.5/4 + 0.5/1).
  CHECK(directional_radius(g, {1, 1, 0}) ==
        doctest::Approx(1.2649110640673518).epsilon(1e-12));
}

TEST_CASE("directional radius matches ray-march oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> scale(0.05, 3.0);
  for (int i = 0; i < 50; ++i) {
    const GaussianPrimitive g =
        make(Vec3::Zero(), random_quat(rng),
             {scale(rng), scale(rng), scale(rng)});
    const Vec3 v = random_dir(rng);
    const double r = directional_radius(g, v);
    const double oracle = ray_march_radius(g, v);
    CHECK(std::abs(r - oracle) / oracle < 1e-6);
  }
}

TEST_CASE("directional radius properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(0.1, 2.0);

  SUBCASE("rotation invariance: rotate body and direction together") {
    for (int i = 0; i < 20; ++i) {
      const Vec3 s(scale(rng), scale(rng), scale(rng));
      const Quat q0 = random_quat(rng);
      const Quat extra = random_quat(rng);
      const Vec3 v = random_dir(rng);
      const double r0 = directional_radius(make(Vec3::Zero(), q0, s), v);
      const double r1 =
          directional_radius(make(Vec3::Zero(), extra * q0, s), extra * v);
      CHECK(std::abs(r0 - r1) < 1e-10);
    }
  }

  SUBCASE("symmetry: r(v) == r(-v)") {
    for (int i = 0; i < 20; ++i) {
      const GaussianPrimitive g = make(
          Vec3::Zero(), random_quat(rng), {scale(rng), scale(rng), scale(rng)});
      const Vec3 v = random_dir(rng);
      CHECK(std::abs(directional_radius(g, v) - directional_radius(g, -v)) <
            1e-12);
    }
  }

  SUBCASE("scale monotonicity") {
    const Vec3 v = random_dir(rng);
    const Quat q = random_quat(rng);
    double prev = 0.0;
    for (double k = 0.5; k < 3.0; k += 0.5) {
      const double r =
          directional_radius(make(Vec3::Zero(), q, {k, k, k}), v);
      CHECK(r > prev);
      prev = r;
    }
  }

  SUBCASE("surface point lies on the quadric") {
    for (int i = 0; i < 20; ++i) {
      const GaussianPrimitive g = make(
          {0.3, -0.1, 2.0}, random_quat(rng), {scale(rng), scale(rng), scale(rng)});
      const Vec3 v = random_dir(rng);
      const double r = directional_radius(g, v);
      const Vec3 x = g.mu + r * v;
      const Mat3 m = ellipsoid_matrix(g).m;
      CHECK(std::abs((x - g.mu).dot(m * (x - g.mu)) - 1.0) < 1e-9);
    }
  }

  SUBCASE("degenerate direction throws") {
    const GaussianPrimitive g = GaussianPrimitive::sphere({0, 0, 0}, 1.0);
    CHECK_THROWS_AS(directional_radius(g, Vec3::Zero()), DegenerateDirection);
  }
}

TEST_CASE("pair gap frozen examples") {
  // Unit spheres three apart: 3 - 1 - 1 = 1.
  const GaussianPrimitive a = GaussianPrimitive::sphere({0, 0, 0}, 1.0);
  const GaussianPrimitive b = GaussianPrimitive::sphere({3, 0, 0}, 1.0);
  CHECK(pair_gap(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  // Tangent spheres: zero gap.
  const GaussianPrimitive c = GaussianPrimitive::sphere({2, 0, 0}, 1.0);
  CHECK(pair_gap(a, c) == doctest::Approx(0.0).epsilon(1e-12));

  // Overlapping spheres: negative gap.
  const GaussianPrimitive d = GaussianPrimitive::sphere({1.5, 0, 0}, 1.0);
  CHECK(pair_gap(a, d) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("pair gap properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.1, 0.6);
  std::normal_distribution<double> pos(0.0, 2.0);

  auto random_prim = [&] {
    return make({pos(rng), pos(rng), pos(rng)}, random_quat(rng),
                {scale(rng), scale(rng), scale(rng)});
  };

  SUBCASE("symmetry in arguments") {
    for (int i = 0; i < 20; ++i) {
      const auto a = random_prim(), b = random_prim();
      CHECK(std::abs(pair_gap(a, b) - pair_gap(b, a)) < 1e-12);
    }
  }

  SUBCASE("rigid invariance") {
    for (int i = 0; i < 20; ++i) {
      auto a = random_prim(), b = random_prim();
      const double g0 = pair_gap(a, b);
      const Quat r = random_quat(rng);
      const Vec3 t(pos(rng), pos(rng), pos(rng));
      a.mu = r * a.mu + t;
      b.mu = r * b.mu + t;
      a.rotation = r * a.rotation;
      b.rotation = r * b.rotation;
      CHECK(std::abs(pair_gap(a, b) - g0) < 1e-10);
    }
  }

  SUBCASE("growing either body shrinks the gap") {
    const auto a = GaussianPrimitive::sphere({0, 0, 0}, 0.5);
    double prev = pair_gap(a, GaussianPrimitive::sphere({4, 0, 0}, 0.1));
    for (double r = 0.3; r < 1.3; r += 0.2) {
      const double g = pair_gap(a, GaussianPrimitive::sphere({4, 0, 0}, r));
      CHECK(g < prev);
      prev = g;
    }
  }

  SUBCASE("coincident centers throw") {
    const auto a = GaussianPrimitive::sphere({1, 2, 3}, 0.5);
    CHECK_THROWS_AS(pair_gap(a, a), CoincidentCenters);
  }
}

TEST_CASE("pair gap gradients match central differences") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> scale(0.2, 0.8);
  const double h = 1e-6;

  for (int trial = 0; trial < 10; ++trial) {
    GaussianPrimitive a =
        make({0, 0, 0}, random_quat(rng), {scale(rng), scale(rng), scale(rng)});
    GaussianPrimitive b = make({2.5, 0.4, -0.3}, random_quat(rng),
                               {scale(rng), scale(rng), scale(rng)});
    const PairGapGrads gg = pair_gap_grads(a, b);
    CHECK(gg.gap == doctest::Approx(pair_gap(a, b)).epsilon(1e-12));

    auto fd = [&](auto&& bump) {
      auto at = [&](double eps) {
        GaussianPrimitive ac = a, bc = b;
        bump(ac, bc, eps);
        return pair_gap(ac, bc);
      };
      return (at(h) - at(-h)) / (2.0 * h);
    };
    using P = GaussianPrimitive;

    for (int k = 0; k < 3; ++k) {
      CHECK(fd([&](P& ac, P&, double e) { ac.mu(k) += e; }) ==
            doctest::Approx(gg.d_mu_i(k)).epsilon(1e-5));
      CHECK(fd([&](P&, P& bc, double e) { bc.mu(k) += e; }) ==
            doctest::Approx(gg.d_mu_j(k)).epsilon(1e-5));
      CHECK(fd([&](P& ac, P&, double e) { ac.scales(k) += e; }) ==
            doctest::Approx(gg.d_scales_i(k)).epsilon(1e-5));
      CHECK(fd([&](P&, P& bc, double e) { bc.scales(k) += e; }) ==
            doctest::Approx(gg.d_scales_j(k)).epsilon(1e-5));
    }
    for (int k = 0; k < 4; ++k) {
      CHECK(fd([&](P& ac, P&, double e) { ac.rotation.coeffs()(k) += e; }) ==
            doctest::Approx(gg.d_rot_i(k)).epsilon(1e-4));
      CHECK(fd([&](P&, P& bc, double e) { bc.rotation.coeffs()(k) += e; }) ==
            doctest::Approx(gg.d_rot_j(k)).epsilon(1e-4));
    }
  }
}

TEST_CASE("rotation gradient pullback matches finite differences") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n;
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    Quat q = random_quat(rng);
    Mat3 a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = n(rng);
    // f(q) = <A, R(q/|q|)>
    auto f = [&](const Quat& qq) {
      return (a.array() * qq.normalized().toRotationMatrix().array()).sum();
    };
    const Vec4 grad = rotation_grad_to_quat(q, a);
    for (int k = 0; k < 4; ++k) {
      Quat qp = q, qm = q;
      qp.coeffs()(k) += h;
      qm.coeffs()(k) -= h;
      const double fd = (f(qp) - f(qm)) / (2.0 * h);
      CHECK(fd == doctest::Approx(grad(k)).epsilon(1e-5));
    }
  }
}

TEST_CASE("primitive invariants") {
  GaussianPrimitive g = GaussianPrimitive::sphere({0, 0, 0}, 1.0);
  std::string why;
  CHECK(satisfies_invariants(g, &why));

  g.scales(1) = -0.1;
  CHECK_FALSE(satisfies_invariants(g, &why));

  g = GaussianPrimitive::sphere({0, 0, 0}, 1.0);
  g.opacity = 0.0;
  CHECK_FALSE(satisfies_invariants(g));
  g.opacity = 1.5;
  CHECK_FALSE(satisfies_invariants(g));

  g = GaussianPrimitive::sphere({0, 0, 0}, 1.0);
  g.color = {1.2, 0.0, 0.0};
  CHECK_FALSE(satisfies_invariants(g));

  g = GaussianPrimitive::sphere({0, 0, 0}, 1.0);
  g.mu(0) = std::nan("");
  CHECK_FALSE(satisfies_invariants(g));
}
