#include <doctest.h>

#include <cmath>
#include <set>

#include "elastofm/crack.hpp"
#include "elastofm/grid.hpp"
#include "elastofm/mesh.hpp"
#include "elastofm/surface.hpp"

using namespace elastofm;

TEST_CASE("direction grid: sizes, norms, triads, weights") {
  DirectionGrid g = direction_grid(20, 10);
  CHECK(g.size() == 200);
  CHECK(3 * g.size() == 600);

  double wsum = 0;
  for (int j = 0; j < g.size(); ++j) {
    CHECK(std::abs(g.dirs[j].norm() - 1.0) < 1e-12);
    Mat3 triad;
    triad.col(0) = g.dirs[j];
    triad.col(1) = g.theta_hat[j];
    triad.col(2) = g.phi_hat[j];
    CHECK((triad.transpose() * triad - Mat3::Identity()).norm() < 1e-12);
    wsum += g.weights[j];
  }
  CHECK(std::abs(wsum - 4 * pi) < 1e-10);

  SUBCASE("quadrature of smooth functions converges at second order") {
    auto integrate = [](const DirectionGrid& grid) {
      double s = 0;
      for (int j = 0; j < grid.size(); ++j) s += grid.weights[j] * grid.dirs[j][2] * grid.dirs[j][2];
      return s;  // int z^2 over S^2 = 4 pi / 3
    };
    double e1 = std::abs(integrate(direction_grid(8, 8)) - 4 * pi / 3);
    double e2 = std::abs(integrate(direction_grid(16, 16)) - 4 * pi / 3);
    CHECK(e2 < e1);
  }
  SUBCASE("antipode indexing") {
    CHECK(g.antipodal_closed());
    for (int j = 0; j < g.size(); ++j)
      CHECK((g.dirs[g.antipode(j)] + g.dirs[j]).norm() < 1e-12);
  }
  SUBCASE("determinism") {
    DirectionGrid h = direction_grid(20, 10);
    for (int j = 0; j < g.size(); ++j) CHECK(g.dirs[j] == h.dirs[j]);
  }
  CHECK_THROWS_AS(direction_grid(1, 8), ValidationError);
}

TEST_CASE("parametric sampling surfaces") {
  SUBCASE("sphere normals are radial") {
    SurfaceSpec spec;
    spec.kind = SurfaceKind::Sphere;
    spec.center = Vec3(0, -4, -2);
    spec.radius = 2.0;
    auto s = parametric_surface(spec, 10, 20);
    CHECK(s.size() == 200);
    for (int i = 0; i < s.size(); ++i) {
      Vec3 expect = (s.points[i] - spec.center).normalized();
      CHECK((s.normals[i] - expect).norm() < 1e-12);
      CHECK((s.points[i] - spec.center).dot(s.normals[i]) > 0);
    }
  }
  SUBCASE("ellipsoid points satisfy the implicit equation") {
    SurfaceSpec spec;
    spec.kind = SurfaceKind::Ellipsoid;
    spec.semi_axes = Vec3(4.5, 4.0, 6.0);
    auto s = parametric_surface(spec, 15, 15);
    for (int i = 0; i < s.size(); ++i) {
      const Vec3 p = s.points[i];
      double f = p[0] * p[0] / (4.5 * 4.5) + p[1] * p[1] / 16.0 + p[2] * p[2] / 36.0;
      CHECK(std::abs(f - 1.0) < 1e-10);
    }
  }
  SUBCASE("cube has six facewise-constant normals, no edge points") {
    SurfaceSpec spec;
    spec.kind = SurfaceKind::Cube;
    spec.center = Vec3(0, 3, 3);
    spec.side = 1.8;
    auto s = parametric_surface(spec, 5, 5);
    CHECK(s.size() == 150);
    std::set<std::array<int, 3>> dirs;
    for (int i = 0; i < s.size(); ++i) {
      dirs.insert({int(std::round(s.normals[i][0])), int(std::round(s.normals[i][1])),
                   int(std::round(s.normals[i][2]))});
      // strictly inside an open face
      Vec3 local = s.points[i] - spec.center;
      int on_face = 0;
      for (int c = 0; c < 3; ++c)
        if (std::abs(std::abs(local[c]) - 0.9) < 1e-12) ++on_face;
      CHECK(on_face == 1);
    }
    CHECK(dirs.size() == 6);
  }
  SUBCASE("unknown kind rejected") {
    CHECK_THROWS_AS(surface_kind_from("torus"), ValidationError);
  }
}

TEST_CASE("meshes: sphere, ellipsoid, cube") {
  TriMesh s = sphere_mesh(Vec3(1, 2, 3), 0.5, 6);
  CHECK(s.verts.size() == 10 * 36 + 2);
  double area = s.area();
  CHECK(area == doctest::Approx(4 * pi * 0.25).epsilon(0.01));
  for (int t = 0; t < (int)s.tris.size(); ++t)
    CHECK(s.tri_normal_raw(t).dot(s.tri_centroid(t) - Vec3(1, 2, 3)) > 0);
  for (std::size_t v = 0; v < s.verts.size(); ++v)
    CHECK((s.vert_normals[v] - (s.verts[v] - Vec3(1, 2, 3)).normalized()).norm() < 1e-12);

  TriMesh e = ellipsoid_mesh(Vec3::Zero(), Vec3(3, 2, 4), 3);
  for (std::size_t v = 0; v < e.verts.size(); ++v) {
    const Vec3 p = e.verts[v];
    double f = p[0] * p[0] / 9 + p[1] * p[1] / 4 + p[2] * p[2] / 16;
    CHECK(std::abs(f - 1.0) < 1e-12);
  }

  TriMesh c = cube_mesh(Vec3(0, 3, 3), 1.8, 4);
  CHECK(c.area() == doctest::Approx(6 * 1.8 * 1.8).epsilon(1e-12));
  for (int t = 0; t < (int)c.tris.size(); ++t)
    CHECK(c.tri_normal_raw(t).dot(c.tri_centroid(t) - Vec3(0, 3, 3)) > 0);
  CHECK(boundary_vertices(c) == std::vector<bool>(c.verts.size(), false));
}

TEST_CASE("penny crack mesh") {
  CrackGeometry ck = penny_crack(Vec3(0, 0, 0), 1.0, Vec3(0, 0, 1), 3);
  ck.validate();

  SUBCASE("area converges; below 1% at refinement 3") {
    CHECK(std::abs(ck.mesh.area() - pi) / pi < 0.01);
    double prev = std::abs(penny_crack(Vec3::Zero(), 1.0, Vec3(0, 0, 1), 1).mesh.area() - pi);
    double cur = std::abs(penny_crack(Vec3::Zero(), 1.0, Vec3(0, 0, 1), 2).mesh.area() - pi);
    CHECK(cur < prev);
  }
  SUBCASE("local frames orthonormal, edge flags on the rim only") {
    int m = 6 * 3;
    int rim_nodes = 6 * m;
    int count = 0;
    for (int v = 0; v < ck.n_nodes(); ++v) {
      if (ck.edge_node[v]) {
        ++count;
        CHECK(std::abs((ck.mesh.verts[v]).norm() - 1.0) < 1e-12);
      }
    }
    CHECK(count == rim_nodes);
  }
  SUBCASE("default stiffness is the identity in any frame") {
    CHECK((ck.stiffness_global(0) - CMat3::Identity()).norm() < 1e-14);
  }
  SUBCASE("tilted crack frames follow the prescribed normal") {
    Vec3 n = Vec3(1, 1, 1).normalized();
    CrackGeometry t = penny_crack(Vec3(1, 0, 0), 0.5, n, 2);
    t.validate();
    for (int v = 0; v < t.n_nodes(); ++v) CHECK((t.nu[v] - n).norm() < 1e-14);
    CHECK(std::abs(t.mesh.area() - pi * 0.25) / (pi * 0.25) < 0.02);
  }
  CHECK_THROWS_AS(penny_crack(Vec3::Zero(), -1.0, Vec3(0, 0, 1), 2), ValidationError);
  CHECK_THROWS_AS(penny_crack(Vec3::Zero(), 1.0, Vec3(0, 0, 0), 2), ValidationError);
}

TEST_CASE("surface patch cracks") {
  TriMesh host = sphere_mesh(Vec3::Zero(), 1.0, 8);
  SUBCASE("polar cap area matches the analytic cap area") {
    const double z0 = 0.6;  // cap z > z0: area 2 pi (1 - z0)
    auto cap = surface_patch(host, [&](const Vec3& c) { return c[2] > z0; });
    cap.validate();
    const double exact = 2 * pi * (1.0 - z0);
    CHECK(std::abs(cap.mesh.area() - exact) / exact < 0.05);
    // normals inherited from the host sphere
    for (int v = 0; v < cap.n_nodes(); ++v)
      CHECK((cap.nu[v] - cap.mesh.verts[v].normalized()).norm() < 1e-12);
    // has a relative boundary
    int edge_count = 0;
    for (bool b : cap.edge_node) edge_count += b;
    CHECK(edge_count > 0);
  }
  SUBCASE("full-surface selection rejected") {
    CHECK_THROWS_AS(surface_patch(host, [](const Vec3&) { return true; }), ValidationError);
  }
  SUBCASE("empty selection rejected") {
    CHECK_THROWS_AS(surface_patch(host, [](const Vec3&) { return false; }), ValidationError);
  }
  SUBCASE("disconnected selection rejected") {
    CHECK_THROWS_AS(
        surface_patch(host, [](const Vec3& c) { return std::abs(c[2]) > 0.8; }),
        ValidationError);
  }
}
