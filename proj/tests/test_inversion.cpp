#include <doctest.h>

#include <cmath>

#include "elastofm/cracksys.hpp"
#include "elastofm/inversion.hpp"
#include "oracles.hpp"

using namespace elastofm;

namespace {
const ElasticMedium kExt{1.5, 1.0, 1.0};
const double kOmega = 4.0;

FarFieldMatrix wrap_op(const DirectionGrid& grid, const CMatX& op_frame, FarFieldRole role) {
  // builds a raw-frame matrix whose operator frame equals op_frame
  FarFieldMatrix m;
  m.grid = grid;
  m.omega = kOmega;
  m.role = role;
  m.media.push_back(kExt);
  if (role == FarFieldRole::Sb) {
    const VecX w = grid_sqrt_weights(grid);
    CMatX a = op_frame - CMatX::Identity(op_frame.rows(), op_frame.cols());
    m.a = w.cwiseInverse().asDiagonal() * a * w.cwiseInverse().asDiagonal();
    m.a += CMatX::Identity(op_frame.rows(), op_frame.cols());
  } else {
    const ChannelFrame f = ChannelFrame::make(grid, wave_numbers(kOmega, kExt));
    const int n = grid.size();
    m.a.resize(3 * n, 3 * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m.a.block<3, 3>(3 * i, 3 * j) = f.inv_blocks[i].cast<cplx>() *
                                        op_frame.block<3, 3>(3 * i, 3 * j) *
                                        f.inv_blocks[j].cast<cplx>();
  }
  return m;
}

CMatX random_hermitian(int n, Rng& rng) {
  CMatX a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
  return 0.5 * (a + a.adjoint());
}
}  // namespace

TEST_CASE("differential matrix") {
  DirectionGrid grid = direction_grid(3, 4);
  FarFieldMatrix f, fb;
  f.grid = fb.grid = grid;
  f.omega = fb.omega = kOmega;
  fb.role = FarFieldRole::Fb;
  Rng rng(5);
  f.a = random_hermitian(36, rng);
  fb.a = random_hermitian(36, rng);

  SUBCASE("F == F_b gives the zero matrix") {
    FarFieldMatrix same = f;
    same.role = FarFieldRole::Fb;
    CHECK(differential_matrix(f, same).a.norm() == 0.0);
  }
  SUBCASE("homogeneous background leaves F unchanged") {
    FarFieldMatrix zero = fb;
    zero.set_zero();
    CHECK((differential_matrix(f, zero).a - f.a).norm() == 0.0);
  }
  SUBCASE("subtraction is reproducible and exact to rounding") {
    auto d = differential_matrix(f, fb);
    CHECK((d.a - (f.a - fb.a)).norm() == 0.0);  // same bits as a fresh subtraction
    CHECK(((d.a + fb.a) - f.a).norm() <= 4e-16 * f.a.norm());
  }
  SUBCASE("grid mismatch rejected") {
    FarFieldMatrix other = fb;
    other.grid = direction_grid(4, 4);
    other.a = CMatX::Zero(48, 48);
    CHECK_THROWS_AS(differential_matrix(f, other), ValidationError);
  }
}

TEST_CASE("scattering matrix structure") {
  DirectionGrid grid = direction_grid(4, 4);
  WaveNumbers wn = wave_numbers(kOmega, kExt);
  FarFieldMatrix fb;
  fb.grid = grid;
  fb.omega = kOmega;
  fb.role = FarFieldRole::Fb;
  fb.media.push_back(kExt);
  fb.set_zero();
  auto sb = scattering_matrix(fb, wn);
  CHECK((sb.a - CMatX::Identity(48, 48)).norm() == 0.0);
  CHECK(unitarity_defect(sb) <= 1e-12);
}

TEST_CASE("noise model") {
  DirectionGrid grid = direction_grid(3, 4);
  FarFieldMatrix f;
  f.grid = grid;
  f.omega = kOmega;
  Rng rng(7);
  f.a = random_hermitian(36, rng);

  SUBCASE("zero amplitude is exact") {
    auto n = apply_noise(f, 0.0, 123);
    CHECK(n.delta == 0.0);
    CHECK((n.f_delta.a - f.a).norm() == 0.0);
  }
  SUBCASE("identical seeds are bitwise identical") {
    auto a = apply_noise(f, 0.03, 42);
    auto b = apply_noise(f, 0.03, 42);
    CHECK(a.delta == b.delta);
    CHECK(a.f_delta.a == b.f_delta.a);
    auto c = apply_noise(f, 0.03, 43);
    CHECK(a.f_delta.a != c.f_delta.a);
  }
  SUBCASE("calibration hits the target exactly per seed") {
    const double eps = calibrate_epsilon(f, 0.05, 11);
    auto n = apply_noise(f, eps, 11);
    CHECK(n.delta == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("mean realized delta tracks the analytic estimate") {
    // E|N_ij|^2 = 2 eps^2/3 -> delta_rms = eps sqrt(2 dim/3)
    const double eps = 0.01;
    double acc = 0;
    const int trials = 40;
    for (int s = 0; s < trials; ++s) acc += apply_noise(f, eps, 1000 + s).delta;
    const double mean = acc / trials;
    const double predicted = eps * std::sqrt(2.0 * 36 / 3.0);
    CHECK(mean == doctest::Approx(predicted).epsilon(0.1));
  }
}

TEST_CASE("f_sharp against brute-force oracles") {
  DirectionGrid grid = direction_grid(3, 4);
  const int dim = 36;
  Rng rng(9);
  FarFieldMatrix id_sb;
  id_sb.grid = grid;
  id_sb.omega = kOmega;
  id_sb.role = FarFieldRole::Sb;
  id_sb.a = CMatX::Identity(dim, dim);

  SUBCASE("real positive diagonal is a fixed point") {
    VecX d = VecX::LinSpaced(dim, 1.0, 3.0);
    FarFieldMatrix fd = wrap_op(grid, CMatX(d.cast<cplx>().asDiagonal()), FarFieldRole::FD);
    auto r = f_sharp(fd, id_sb);
    CHECK((r.f_sharp.a - CMatX(d.cast<cplx>().asDiagonal())).norm() < 1e-12 * d.norm());
  }
  SUBCASE("purely imaginary PSD input: Re vanishes, Im survives") {
    CMatX m = random_hermitian(dim, rng);
    m = m * m.adjoint();  // PSD
    FarFieldMatrix fd = wrap_op(grid, CMatX(iu * m), FarFieldRole::FD);
    auto r = f_sharp(fd, id_sb);
    CHECK((r.f_sharp.a - m).norm() < 1e-10 * m.norm());
  }
  SUBCASE("|Re| matches the independent Jacobi eigensolver") {
    CMatX m = random_hermitian(dim, rng);
    FarFieldMatrix fd = wrap_op(grid, m, FarFieldRole::FD);
    auto r = f_sharp(fd, id_sb);
    VecX ev;
    CMatX evec;
    oracles::jacobi_hermitian(m, ev, evec);
    CMatX abs_m = evec * ev.cwiseAbs().asDiagonal() * evec.adjoint();
    CHECK((r.f_sharp.a - abs_m).norm() <= 1e-12 * abs_m.norm());
  }
  SUBCASE("eigensystem invariants") {
    CMatX m = random_hermitian(dim, rng);
    FarFieldMatrix fd = wrap_op(grid, m, FarFieldRole::FD);
    auto r = f_sharp(fd, id_sb);
    // Hermitian, PSD, reconstruction
    CHECK((r.f_sharp.a - r.f_sharp.a.adjoint()).norm() <= 1e-12 * r.f_sharp.a.norm());
    CHECK(r.eig.mu.minCoeff() >= 0.0);
    for (int i = 1; i < r.eig.mu.size(); ++i) CHECK(r.eig.mu[i] <= r.eig.mu[i - 1]);
    CMatX rec = r.eig.psi * r.eig.mu.asDiagonal() * r.eig.psi.adjoint();
    CHECK((rec - r.f_sharp.a).norm() <= 1e-10 * r.f_sharp.a.norm());
    for (int i = 0; i < r.eig.mu.size(); ++i)
      CHECK(r.eig.psi.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("PSD square root") {
  CHECK((sqrt_psd(CMatX(CMatX::Identity(5, 5))) - CMatX::Identity(5, 5)).norm() < 1e-13);
  CMatX d = CMatX::Zero(3, 3);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  CMatX s = sqrt_psd(d);
  CHECK(std::abs(s(0, 0) - 2.0) < 1e-13);
  CHECK(std::abs(s(1, 1) - 1.0) < 1e-13);
  CHECK(std::abs(s(2, 2)) < 1e-13);
  Rng rng(13);
  CMatX m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
  CMatX a = m * m.adjoint();
  CMatX r = sqrt_psd(a);
  CHECK((r * r - a).norm() <= 1e-10 * a.norm());
}

TEST_CASE("Tikhonov with the Morozov principle") {
  SUBCASE("identity operator closed form") {
    EigenSystem eig;
    const int n = 12;
    eig.mu = VecX::Ones(n);
    eig.psi = CMatX::Identity(n, n);
    CVecX b(n);
    Rng rng(17);
    for (int i = 0; i < n; ++i) b[i] = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
    const double delta = 0.3;
    auto r = tikhonov_morozov(eig, b, delta);
    CHECK(r.alpha == doctest::Approx(delta / (1.0 - delta)).epsilon(1e-12));
    CHECK((r.g - b / (1.0 + r.alpha)).norm() <= 1e-12 * b.norm());
  }
  SUBCASE("zero noise solves the system") {
    Rng rng(19);
    CMatX m = random_hermitian(10, rng);
    CMatX a2 = m * m.adjoint() + 0.1 * CMatX::Identity(10, 10);
    VecX ev;
    CMatX evec;
    hermitian_eig(a2, ev, evec);
    EigenSystem eig;
    eig.mu = ev.reverse();
    eig.psi = evec.rowwise().reverse();
    CVecX b(10);
    for (int i = 0; i < 10; ++i) b[i] = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
    auto r = tikhonov_morozov(eig, b, 0.0);
    const CMatX a = sqrt_psd(a2);
    CHECK((a * r.g - b).norm() <= 1e-8 * b.norm());
  }
  SUBCASE("Morozov alpha matches a brute-force scan on random PSD systems") {
    Rng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 20;
      CMatX m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          m(i, j) = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
      CMatX a2 = m * m.adjoint();
      VecX ev;
      CMatX evec;
      hermitian_eig(a2, ev, evec);
      EigenSystem eig;
      eig.mu = ev.reverse().cwiseMax(0.0);
      eig.psi = evec.rowwise().reverse();
      CVecX b(n);
      for (int i = 0; i < n; ++i) b[i] = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
      const double delta = 0.05 + 0.2 * rng.next_unit();
      auto r = tikhonov_morozov(eig, b, delta);
      // discrepancy postcondition
      const CMatX a = sqrt_psd(a2);
      CHECK(std::abs((a * r.g - b).norm() - delta * b.norm()) <= 1e-8 * b.norm());
      // independent fine scan of the discrepancy function
      double best = 0, bestdiff = 1e300;
      for (double la = std::log(r.alpha) - 0.01; la <= std::log(r.alpha) + 0.01; la += 1e-4) {
        const double alpha = std::exp(la);
        CVecX g = evec * (ev.array() + alpha).inverse().matrix().asDiagonal() *
                  evec.adjoint() * (a.adjoint() * b);
        const double diff = std::abs((a * g - b).norm() - delta * b.norm());
        if (diff < bestdiff) {
          bestdiff = diff;
          best = alpha;
        }
      }
      CHECK(std::abs(best - r.alpha) <= 1e-3 * r.alpha);
    }
  }
  SUBCASE("range deficiency is flagged") {
    EigenSystem eig;
    eig.mu = VecX::Zero(4);
    eig.mu[0] = 1.0;  // rank-1 operator
    eig.psi = CMatX::Identity(4, 4);
    CVecX b = CVecX::Zero(4);
    b[3] = 1.0;  // entirely outside the range
    auto r = tikhonov_morozov(eig, b, 0.1);
    CHECK_FALSE(r.attainable);
  }
  CHECK_THROWS_AS(tikhonov_morozov(EigenSystem{VecX::Ones(2), CMatX::Identity(2, 2), 0},
                                   CVecX::Ones(2), 1.5),
                  ValidationError);
}

TEST_CASE("Picard norm") {
  EigenSystem eig;
  const int n = 6;
  eig.mu = VecX::LinSpaced(n, 3.0, 0.5).cwiseAbs();
  std::sort(eig.mu.data(), eig.mu.data() + n, std::greater<double>());
  eig.psi = CMatX::Identity(n, n);

  SUBCASE("single eigenvector") {
    CVecX b = CVecX::Zero(n);
    b[0] = 1.0;
    CHECK(picard_norm(eig, b, 1) == doctest::Approx(1.0 / eig.mu[0]).epsilon(1e-14));
  }
  SUBCASE("orthogonal right-hand side") {
    CVecX b = CVecX::Zero(n);
    b[n - 1] = 1.0;
    CHECK(picard_norm(eig, b, 2) == 0.0);
  }
  SUBCASE("matches the direct truncated least-squares solve") {
    Rng rng(29);
    CMatX m = random_hermitian(n, rng);
    CMatX a2 = m * m.adjoint();
    VecX ev;
    CMatX evec;
    hermitian_eig(a2, ev, evec);
    EigenSystem e2;
    e2.mu = ev.reverse().cwiseMax(0.0);
    e2.psi = evec.rowwise().reverse();
    CVecX b(n);
    for (int i = 0; i < n; ++i) b[i] = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
    const int np = 4;
    // direct: solve A g = b restricted to the top-np eigenspace of A = a2^(1/2)
    CMatX psi = e2.psi.leftCols(np);
    CVecX gd = psi * (psi.adjoint() * b).cwiseQuotient(
                         e2.mu.head(np).cwiseSqrt().cast<cplx>());
    CHECK(picard_norm(e2, b, np) == doctest::Approx(gd.squaredNorm()).epsilon(1e-10));
  }
  SUBCASE("scaling covariance: argmax invariant under positive scaling") {
    Rng rng(31);
    CMatX m = random_hermitian(n, rng);
    CMatX a2 = m * m.adjoint();
    VecX ev;
    CMatX evec;
    hermitian_eig(a2, ev, evec);
    EigenSystem e2, e2s;
    e2.mu = ev.reverse().cwiseMax(0.0);
    e2.psi = evec.rowwise().reverse();
    const double c = 7.3;
    e2s = e2;
    e2s.mu *= c;
    CVecX b(n);
    for (int i = 0; i < n; ++i) b[i] = cplx(rng.next_symmetric(1.0), rng.next_symmetric(1.0));
    CHECK(picard_norm(e2s, b, 3) ==
          doctest::Approx(picard_norm(e2, b, 3) / c).epsilon(1e-12));
  }
  CHECK_THROWS_AS(picard_norm(eig, CVecX::Ones(n), 0), ValidationError);
}

TEST_CASE("trial right-hand sides (homogeneous background)") {
  Background bg(BackgroundModel(HomogeneousBackground{kExt}), kOmega);
  DirectionGrid grid = direction_grid(20, 10);
  const Vec3 x0(0.3, -0.1, 0.0);
  const Vec3 nu = Vec3(1, 2, 2).normalized();
  CVecX phi = trial_far_field(bg, grid, x0, nu);
  REQUIRE(phi.size() == 600);

  SUBCASE("matches finite differences of the plane-wave tensor") {
    WaveNumbers wn = bg.wn();
    const double la = kExt.lambda, mu = kExt.mu;
    const double h = 1e-5;
    for (int i = 0; i < grid.size(); i += 37) {
      const Vec3 d = -grid.dirs[i];
      // numeric grad W and the (nu x nu) : C : grad W contraction
      CVec3 v = CVec3::Zero();
      for (int m = 0; m < 3; ++m) {
        cplx acc = 0;
        for (int k = 0; k < 3; ++k) {
          for (int l = 0; l < 3; ++l) {
            Vec3 e = Vec3::Zero();
            e[l] = 1.0;
            const cplx dW = (plane_wave_tensor(x0 + h * e, d, wn)(k, m) -
                             plane_wave_tensor(x0 - h * e, d, wn)(k, m)) /
                            (2 * h);
            const double cc = la * (k == l ? 1.0 : 0.0) + 2.0 * mu * nu[k] * nu[l];
            acc += cc * dW;
          }
        }
        v[m] = acc;
      }
      CHECK((phi.segment<3>(3 * i) - v).norm() <= 1e-6 * v.norm());
    }
  }
  SUBCASE("with the identity scattering matrix b equals Phi exactly") {
    FarFieldMatrix sb;
    sb.grid = grid;
    sb.omega = kOmega;
    sb.role = FarFieldRole::Sb;
    sb.a = CMatX::Identity(600, 600);
    CVecX b = trial_rhs(bg, grid, x0, nu, sb);
    CHECK((b - phi).norm() <= 1e-12 * phi.norm());
  }
}

TEST_CASE("indicator map basics") {
  DirectionGrid grid = direction_grid(4, 4);
  Background bg(BackgroundModel(HomogeneousBackground{kExt}), kOmega);
  FarFieldMatrix sb;
  sb.grid = grid;
  sb.omega = kOmega;
  sb.role = FarFieldRole::Sb;
  sb.a = CMatX::Identity(48, 48);
  Rng rng(37);
  CMatX m = random_hermitian(48, rng);
  FarFieldMatrix fd = wrap_op(grid, CMatX(m * m.adjoint() + iu * (m - m.adjoint())),
                              FarFieldRole::FD);
  // build a proper F-sharp input: any complex matrix works
  fd.a += 0.1 * random_hermitian(48, rng);
  auto fs = f_sharp(fd, sb);

  SurfaceSpec spec;
  spec.kind = SurfaceKind::PlanarPatch;
  spec.center = Vec3(0, 0, 0);
  spec.normal = Vec3(0, 0, 1);
  spec.half_u = spec.half_v = 1.0;
  auto sampling = parametric_surface(spec, 3, 3);

  IndicatorOptions opt;
  opt.method = InversionMethod::Tikhonov;
  opt.delta = 0.05;
  auto map = indicator_map(fs, sb, bg, sampling, opt);
  REQUIRE(map.values.size() == 9);

  SUBCASE("indicator is the reciprocal density norm") {
    // recompute one point by hand
    const ChannelFrame fr = ChannelFrame::make(grid, bg.wn());
    CVecX phi = trial_far_field(bg, grid, sampling.points[4], sampling.normals[4]);
    CVecX bhat = operator_frame(sb).adjoint() * fr.lift(phi);
    auto r = tikhonov_morozov(fs.eig, bhat, opt.delta);
    CHECK(map.values[4] == doctest::Approx(1.0 / r.g.norm()).epsilon(1e-12));
  }
  SUBCASE("batched equals looped for Picard as well") {
    IndicatorOptions popt;
    popt.method = InversionMethod::Picard;
    popt.delta = 0.05;
    auto pmap = indicator_map(fs, sb, bg, sampling, popt);
    const ChannelFrame fr = ChannelFrame::make(grid, bg.wn());
    for (int p = 0; p < sampling.size(); ++p) {
      CVecX phi = trial_far_field(bg, grid, sampling.points[p], sampling.normals[p]);
      CVecX bhat = operator_frame(sb).adjoint() * fr.lift(phi);
      const double expect = 1.0 / std::sqrt(picard_norm(fs.eig, bhat, (int)pmap.alpha_or_np[p]));
      CHECK(pmap.values[p] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("threshold masks") {
    auto t0 = threshold(map, 0.0);
    for (bool b : t0.mask) CHECK(b);
    auto t1 = threshold(map, 1.0);
    int kept = 0;
    for (bool b : t1.mask) kept += b;
    CHECK(kept == 0);
    auto t = threshold(map, 0.1);
    const double cut = 0.1 * map.values.maxCoeff();
    for (int p = 0; p < 9; ++p) {
      CHECK(t.mask[p] == (map.values[p] > cut));
      CHECK(t.truncated[p] == (t.mask[p] ? map.values[p] : 0.0));
    }
  }
}
