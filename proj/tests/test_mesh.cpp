#include <doctest.h>

#include <touchsplat/mesh.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <map>

using namespace touchsplat;

namespace {

// Divergence-theorem volume; positive iff faces are consistently
// oriented outward.
double signed_volume(const TriangleMesh& mesh) {
  double six_v = 0.0;
  for (const auto& t : mesh.triangles)
    six_v += mesh.vertices[t[0]].dot(
        mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  return six_v / 6.0;
}

TriangleMesh single_triangle() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("aabb expand, containment, intersection") {
  Aabb box;
  box.expand({1, 2, 3});
  box.expand({-1, 0, 5});
  CHECK(box.lo == Vec3(-1, 0, 3));
  CHECK(box.hi == Vec3(1, 2, 5));
  CHECK(box.contains({0, 1, 4}));
  CHECK(!box.contains({0, 1, 5.01}));
  CHECK(box.center() == Vec3(0, 1, 4));
  CHECK(box.diagonal() == doctest::Approx(std::sqrt(4.0 + 4.0 + 4.0)));

  Aabb other;
  other.expand({0.5, 1.5, 4.5});
  other.expand({9, 9, 9});
  CHECK(box.intersects(other));
  Aabb far_box;
  far_box.expand({10, 10, 10});
  far_box.expand({11, 11, 11});
  CHECK(!box.intersects(far_box));
}

TEST_CASE("builtin objects are watertight and outward oriented") {
  for (const ObjectKind kind :
       {ObjectKind::Cube, ObjectKind::Can, ObjectKind::Hydrant}) {
    const TriangleMesh mesh = builtin_object(kind);
    CHECK(edge_manifold(mesh));
    CHECK(watertight(mesh));
    CHECK(signed_volume(mesh) > 0.0);
    CHECK(mesh.face_normals.size() == mesh.triangles.size());
    CHECK(mesh.face_albedo.size() == mesh.triangles.size());
    for (const Vec3& n : mesh.face_normals)
      CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cube is the unit box") {
  const TriangleMesh cube = builtin_object(ObjectKind::Cube);
  CHECK(cube.triangles.size() == 12);
  CHECK(cube.area() == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(signed_volume(cube) == doctest::Approx(1.0).epsilon(1e-12));
  const Aabb box = cube.bounds();
  CHECK(box.lo.isApprox(Vec3(-0.5, -0.5, -0.5), 1e-12));
  CHECK(box.hi.isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
}

TEST_CASE("can stays inside its lathe profile bounds") {
  const Aabb box = builtin_object(ObjectKind::Can).bounds();
  // Ring vertices hit the extreme angles exactly (40 segments include
  // 0, 90, 180, 270 degrees), so the bounds equal the widest ridge.
  CHECK(box.lo.isApprox(Vec3(-0.35, -0.35, -0.5), 1e-12));
  CHECK(box.hi.isApprox(Vec3(0.35, 0.35, 0.5), 1e-12));
}

TEST_CASE("hydrant bolts protrude past the body") {
  const TriangleMesh hydrant = builtin_object(ObjectKind::Hydrant);
  const Aabb box = hydrant.bounds();
  // Body radius 0.25; bolt apex reaches 0.27 + 0.06.
  CHECK(box.hi.x() == doctest::Approx(0.33).epsilon(1e-12));
  CHECK(box.lo.x() == doctest::Approx(-0.33).epsilon(1e-12));
  CHECK(box.lo.z() == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("edge_manifold rejects a fin, watertight rejects open edges") {
  TriangleMesh fin;
  fin.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, -1, 0}};
  fin.triangles = {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};  // three faces, one edge
  fin.finalize();
  CHECK(!edge_manifold(fin));
  CHECK(!watertight(fin));

  const TriangleMesh tri = single_triangle();
  CHECK(edge_manifold(tri));  // boundary edges are fine for manifoldness
  CHECK(!watertight(tri));    // but not for closedness
}

TEST_CASE("finalize recomputes normals and fills default albedo") {
  TriangleMesh m = single_triangle();
  CHECK(m.face_normals[0].isApprox(Vec3(0, 0, 1), 1e-12));
  CHECK(m.face_albedo[0] == doctest::Approx(0.7));

  // Moving a vertex and re-finalizing must refresh the normal but keep
  // the existing albedo untouched.
  m.face_albedo[0] = 0.25;
  m.vertices[2] = {0, 0, 1};
  m.finalize();
  CHECK(m.face_normals[0].isApprox(Vec3(0, -1, 0), 1e-12));
  CHECK(m.face_albedo[0] == doctest::Approx(0.25));
}

TEST_CASE("surface sampling lands on the surface with face normals") {
  const TriangleMesh cube = builtin_object(ObjectKind::Cube);
  const GroundTruth gt = sample_surface(cube, 5000, 7);
  REQUIRE(gt.points.size() == 5000);
  REQUIRE(gt.normals.size() == 5000);
  for (std::size_t i = 0; i < gt.points.size(); ++i) {
    const Vec3& p = gt.points[i];
    // On the unit box a surface point has max-coordinate exactly 1/2.
    const double m =
        std::max({std::abs(p.x()), std::abs(p.y()), std::abs(p.z())});
    CHECK(m == doctest::Approx(0.5).epsilon(1e-12));
    // The normal is the axis the point saturates, pointing outward.
    const Vec3& n = gt.normals[i];
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
    int axis = 0;
    for (int a = 1; a < 3; ++a)
      if (std::abs(n(a)) > std::abs(n(axis))) axis = a;
    CHECK(std::abs(n(axis)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p(axis) * n(axis) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("surface sampling is area weighted") {
  // Two coplanar triangles with areas 1/2 and 8; expected hit ratio
  // 16:1 within loose binomial tolerance.
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0},  {0, 1, 0},
                {2, 0, 0}, {6, 0, 0},  {2, 4, 0}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  m.finalize();
  const GroundTruth gt = sample_surface(m, 10000, 11);
  std::size_t small_hits = 0;
  for (const Vec3& p : gt.points)
    if (p.x() < 1.5) ++small_hits;
  const double expect = 10000.0 * 0.5 / 8.5;
  CHECK(double(small_hits) > 0.7 * expect);
  CHECK(double(small_hits) < 1.3 * expect);
}

TEST_CASE("surface sampling is seed deterministic") {
  const TriangleMesh can = builtin_object(ObjectKind::Can);
  const GroundTruth a = sample_surface(can, 400, 3);
  const GroundTruth b = sample_surface(can, 400, 3);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i] == b.points[i]);
    CHECK(a.normals[i] == b.normals[i]);
  }
  const GroundTruth c = sample_surface(can, 400, 4);
  bool any_differ = false;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    if (c.points[i] != a.points[i]) any_differ = true;
  CHECK(any_differ);
}
