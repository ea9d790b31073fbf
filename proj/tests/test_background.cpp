#include <doctest.h>

#include "elastofm/background.hpp"
#include "elastofm/inversion.hpp"
#include "elastofm/grid.hpp"
#include "oracles.hpp"

using namespace elastofm;

namespace {
const ElasticMedium kExt{1.5, 1.0, 1.0};
const ElasticMedium kInt{0.4, 0.2, 0.5};
const double kOmega = 4.0;

Background coarse_inclusion(int freq = 4) {
  PenetrableInclusionBackground p;
  p.mesh = sphere_mesh(Vec3::Zero(), 0.5, freq);
  p.interiors = {kInt};
  p.exterior = kExt;
  return Background(BackgroundModel(p), kOmega);
}
}  // namespace

TEST_CASE("homogeneous background basics") {
  Background bg(BackgroundModel(HomogeneousBackground{kExt}), kOmega);
  const Vec3 x(0.3, -0.2, 0.5), d(0, 0, 1);
  CHECK((bg.response(x, d) - plane_wave_tensor(x, d, bg.wn())).norm() == 0.0);

  DirectionGrid grid = direction_grid(4, 4);
  auto ff = background_far_matrix(bg, grid);
  CHECK(ff.f_b.a.norm() == 0.0);
  CHECK(ff.f_b.role == FarFieldRole::Fb);

  // Kupradze reciprocity is exact for the homogeneous model
  CHECK(mixed_reciprocity_residual(bg, x, Vec3(0, 1, 0)) <= 1e-12);
}

TEST_CASE("zero material contrast scatters nothing") {
  PenetrableInclusionBackground p;
  p.mesh = sphere_mesh(Vec3::Zero(), 0.5, 3);
  p.interiors = {kExt};
  p.exterior = kExt;
  Background bg(BackgroundModel(p), kOmega);
  const auto& r = bg.plane_solution(Vec3(0, 0, 1));
  const double inc_norm = r.uinc.norm();
  CHECK(r.w.norm() <= 1e-8 * inc_norm);
  CHECK(r.s.norm() <= 1e-8 * r.tinc.norm());
  CHECK(bg.solver().far_field(r, Vec3(1, 0, 0)).norm() <= 1e-10);
}

TEST_CASE("transmission solve: continuity and field equations") {
  Background bg = coarse_inclusion(4);
  auto& solver = bg.solver();
  const Vec3 d(0, 0, 1);
  const auto& r = bg.plane_solution(d);

  SUBCASE("interior field satisfies Navier with interior coefficients") {
    const Vec3 x(0.05, 0.08, -0.1);
    REQUIRE(solver.point_inside(x));
    for (int col = 0; col < 3; ++col) {
      auto u = [&](const Vec3& xi) -> CVec3 {
        return solver.total_field(r, xi).col(col);
      };
      CHECK(oracles::navier_residual(u, x, kInt, kOmega, 0.004) < 1e-3);
    }
  }
  SUBCASE("exterior field satisfies Navier with exterior coefficients") {
    const Vec3 x(0.9, 0.2, 0.3);
    REQUIRE(!solver.point_inside(x));
    for (int col = 0; col < 3; ++col) {
      auto u = [&](const Vec3& xi) -> CVec3 {
        return solver.total_field(r, xi).col(col);
      };
      CHECK(oracles::navier_residual(u, x, kExt, kOmega, 0.004) < 1e-3);
    }
  }
  SUBCASE("displacement continuity across the interface") {
    // Richardson-extrapolate one-sided traces to the surface from both sides
    const Vec3 n = Vec3(1, 1, 1).normalized();
    const double h = 0.07;
    CMat3 u_out = 2.0 * solver.total_field(r, (0.5 + h) * n) -
                  solver.total_field(r, (0.5 + 2 * h) * n);
    CMat3 u_in = 2.0 * solver.total_field(r, (0.5 - h) * n) -
                 solver.total_field(r, (0.5 - 2 * h) * n);
    CHECK((u_out - u_in).norm() / u_out.norm() < 0.15);
  }
  SUBCASE("far field matches the extrapolated near field") {
    const Vec3 xh(0, 1, 0);
    CMat3 ff = solver.far_field(r, xh);
    auto stripped = [&](double rr) -> CMat3 {
      CMat3 near = solver.total_field(r, rr * xh) - plane_wave_tensor(rr * xh, d, bg.wn());
      const Mat3 pp = xh * xh.transpose();
      return (pp * near) * (rr / (bg.wn().alpha_p * std::exp(iu * bg.wn().k_p * rr))) +
             ((Mat3::Identity() - pp) * near) *
                 (rr / (bg.wn().alpha_s * std::exp(iu * bg.wn().k_s * rr)));
    };
    // average over one P/S beat period to cancel the oscillating cross term,
    // then Richardson in 1/r to remove the smooth next-order term
    const double beat = 2 * pi / (bg.wn().k_s - bg.wn().k_p);
    auto beat_avg = [&](double rr) {
      CMat3 avg = CMat3::Zero();
      const int ns = 8;
      for (int j = 0; j < ns; ++j) avg += stripped(rr + j * beat / ns) / double(ns);
      return avg;
    };
    const double rr = 50.0;  // 50 scatterer diameters
    CMat3 guess = 2.0 * beat_avg(2.0 * rr) - beat_avg(rr);
    CHECK((guess - ff).norm() / ff.norm() < 0.01);
  }
}

TEST_CASE("mixed reciprocity on the coarse sphere") {
  Background bg = coarse_inclusion(4);
  SUBCASE("exterior point") {
    double res = mixed_reciprocity_residual(bg, Vec3(0.8, 0.1, -0.2), Vec3(0, 0, 1));
    CHECK(res < 0.05);
  }
  SUBCASE("interior point") {
    double res = mixed_reciprocity_residual(bg, Vec3(0.1, -0.05, 0.12), Vec3(0, 1, 0));
    CHECK(res < 0.05);
  }
}

TEST_CASE("background far matrix block structure") {
  Background bg = coarse_inclusion(3);
  DirectionGrid grid = direction_grid(4, 4);
  auto ff = background_far_matrix(bg, grid);
  REQUIRE(ff.f_b.dim() == 48);
  SUBCASE("block reciprocity within a few percent at the desk mesh") {
    CHECK(block_reciprocity_defect(ff.f_b) < 0.06);
  }
}

TEST_CASE("tabulated background is exact-lookup only") {
  TabulatedBackground t;
  t.grid = direction_grid(4, 4);
  t.omega = kOmega;
  t.exterior = kExt;
  t.far_matrix = CMatX::Zero(48, 48);
  const Vec3 x(0.1, 0.2, 0.3), d(0, 0, 1);
  t.add_sample(x, d, CMat3::Identity());
  Background bg(BackgroundModel(t), kOmega);
  CHECK((bg.response(x, d) - CMat3::Identity()).norm() == 0.0);
  CHECK_THROWS_AS(bg.response(Vec3(9, 9, 9), d), ValidationError);
  CHECK_THROWS_AS(Background(BackgroundModel(t), 2.0), ValidationError);
  DirectionGrid other = direction_grid(6, 4);
  CHECK_THROWS_AS(background_far_matrix(bg, other), ValidationError);
}

TEST_CASE("monotonicity violation rejected") {
  PenetrableInclusionBackground p;
  p.mesh = sphere_mesh(Vec3::Zero(), 0.5, 2);
  p.interiors = {ElasticMedium{2.0, 0.5, 1.0}};
  p.exterior = ElasticMedium{1.0, 1.0, 1.0};
  Background bg(BackgroundModel(p), kOmega);
  CHECK_THROWS_AS(bg.solver(), ValidationError);
}

TEST_CASE("background traction against finite differences (homogeneous)") {
  Background bg(BackgroundModel(HomogeneousBackground{kExt}), kOmega);
  const Vec3 y(0.2, -0.1, 0.4), d = Vec3(1, 2, -1).normalized();
  const Vec3 nu = Vec3(0, 1, 1).normalized();
  CMat3 t = bg.traction_tensor(y, nu, d);
  const double h = 1e-5;
  const double la = kExt.lambda, mu = kExt.mu;
  for (int m = 0; m < 3; ++m) {
    // traction of column m from numeric gradients of the response
    CMat3 jac;
    for (int c = 0; c < 3; ++c) {
      Vec3 e = Vec3::Zero();
      e[c] = 1.0;
      CMat3 dW = (bg.response(y + h * e, d) - bg.response(y - h * e, d)) / (2 * h);
      jac.col(c) = dW.col(m);
    }
    CVec3 expect = la * jac.trace() * nu.cast<cplx>() +
                   mu * ((jac + jac.transpose()) * nu.cast<cplx>());
    CHECK((t.col(m) - expect).norm() <= 1e-6 * expect.norm());
  }
}

TEST_CASE("scattering operator at a coarse inclusion mesh") {
  Background bg = coarse_inclusion(4);
  DirectionGrid grid = direction_grid(12, 8);
  auto fb = background_far_matrix(bg, grid);
  auto sb = scattering_matrix(fb.f_b, bg.wn());
  CHECK(unitarity_defect(sb) < 0.02);
  CHECK(scattering_identity_residual(bg, fb.f_b, Vec3(0.1, -0.05, 0.12)) < 0.06);
}

TEST_CASE("solver warnings surface resolution and range issues") {
  PenetrableInclusionBackground p{sphere_mesh(Vec3::Zero(), 0.5, 2), kInt, kExt};
  Background bg(BackgroundModel(p), kOmega);
  auto& solver = bg.solver();
  bool warned = false;
  for (const auto& w : solver.warnings) warned |= w.find("under-resolved") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("scattered far field converges under mesh refinement") {
  DirectionGrid grid = direction_grid(4, 4);
  double prev_step = 1e300;
  CMatX last;
  for (int f : {3, 4, 5}) {
    PenetrableInclusionBackground p{sphere_mesh(Vec3::Zero(), 0.5, f), kInt, kExt};
    Background bg(BackgroundModel(p), kOmega);
    auto fb = background_far_matrix(bg, grid);
    if (last.size() > 0) {
      const double step = (fb.f_b.a - last).norm() / fb.f_b.a.norm();
      CHECK(step < prev_step);
      prev_step = step;
    }
    last = fb.f_b.a;
  }
  CHECK(prev_step < 0.02);  // Cauchy increments shrink toward convergence
}
