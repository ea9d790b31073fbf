#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "elastofm/background.hpp"
#include "elastofm/farfield.hpp"
#include "elastofm/linalg.hpp"
#include "elastofm/rng.hpp"
#include "elastofm/surface.hpp"
#include "elastofm/wavecore.hpp"

namespace elastofm {

// ---------------------------------------------------------------------------
// Operator frame. Far-field matrices store raw kernel samples; the spectral
// pipeline works with the L2(S^2)-consistent Nystrom symmetrization
// A_op = W^(1/2) A W^(1/2), where W carries the grid quadrature weights. In
// this frame adjoints are plain conjugate transposes and l2 norms of density
// vectors equal their L2(S^2) norms.
// ---------------------------------------------------------------------------

inline VecX grid_sqrt_weights(const DirectionGrid& grid) {
  VecX w(3 * grid.size());
  for (int j = 0; j < grid.size(); ++j)
    w.segment<3>(3 * j).setConstant(std::sqrt(grid.weights[j]));
  return w;
}

/// Per-direction energy-flux channel weights B = k_p a_p P + k_s a_s (I - P),
/// the P/S pair of the scattering operator. The frame blocks
/// Lambda_i = sqrt(w_i) B_i^(1/2) renormalize the P and S far-field channels
/// so that the scattering operator becomes a plain unitary matrix and l2
/// norms realize the flux-weighted L2(S^2) norm.
struct ChannelFrame {
  std::vector<Mat3> blocks;      // Lambda_i
  std::vector<Mat3> inv_blocks;  // Lambda_i^{-1}

  static ChannelFrame make(const DirectionGrid& grid, const WaveNumbers& wn) {
    ChannelFrame f;
    f.blocks.resize(grid.size());
    f.inv_blocks.resize(grid.size());
    const double sp = std::sqrt(wn.k_p * wn.alpha_p);
    const double ss = std::sqrt(wn.k_s * wn.alpha_s);
    for (int i = 0; i < grid.size(); ++i) {
      const Vec3 xh = grid.dirs[i];
      const Mat3 pp = xh * xh.transpose();
      const double sw = std::sqrt(grid.weights[i]);
      f.blocks[i] = sw * (sp * pp + ss * (Mat3::Identity() - pp));
      f.inv_blocks[i] = (pp / sp + (Mat3::Identity() - pp) / ss) / sw;
    }
    return f;
  }

  CMatX congruence(const CMatX& a) const {
    const int n = static_cast<int>(blocks.size());
    CMatX out(a.rows(), a.cols());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.block<3, 3>(3 * i, 3 * j) =
            blocks[i].cast<cplx>() * a.block<3, 3>(3 * i, 3 * j) * blocks[j].cast<cplx>();
    return out;
  }
  CVecX lift(const CVecX& v) const {  // v -> Lambda v
    CVecX out(v.size());
    for (std::size_t i = 0; i < blocks.size(); ++i)
      out.segment<3>(3 * i) = blocks[i].cast<cplx>() * v.segment<3>(3 * i);
    return out;
  }
  CMatX lift_cols(const CMatX& v) const {
    CMatX out(v.rows(), v.cols());
    for (std::size_t i = 0; i < blocks.size(); ++i)
      out.middleRows<3>(3 * i) = blocks[i].cast<cplx>() * v.middleRows<3>(3 * i);
    return out;
  }
  CVecX lower(const CVecX& v) const {  // v -> Lambda^{-1} v
    CVecX out(v.size());
    for (std::size_t i = 0; i < inv_blocks.size(); ++i)
      out.segment<3>(3 * i) = inv_blocks[i].cast<cplx>() * v.segment<3>(3 * i);
    return out;
  }
};

inline WaveNumbers frame_wavenumbers(const FarFieldMatrix& m) {
  require(!m.media.empty(), "far-field matrix carries no media table");
  return wave_numbers(m.omega, m.media.front());
}

/// Raw kernel matrix -> operator frame (flux-weighted Nystrom
/// symmetrization). The scattering matrix stores its channel weights in the
/// raw blocks already, so only the grid weights are applied to S - I.
inline CMatX operator_frame(const FarFieldMatrix& m) {
  if (m.role == FarFieldRole::Sb) {
    const VecX w = grid_sqrt_weights(m.grid);
    CMatX a = m.a - CMatX::Identity(m.dim(), m.dim());
    a = w.asDiagonal() * a * w.asDiagonal();
    a += CMatX::Identity(m.dim(), m.dim());
    return a;
  }
  const ChannelFrame f = ChannelFrame::make(m.grid, frame_wavenumbers(m));
  return f.congruence(m.a);
}

// ---------------------------------------------------------------------------
// Differential operator and the scattering matrix
// ---------------------------------------------------------------------------

inline FarFieldMatrix differential_matrix(const FarFieldMatrix& f, const FarFieldMatrix& f_b) {
  require(f.compatible_with(f_b), "differential_matrix: grid or frequency mismatch");
  FarFieldMatrix d = f;
  d.role = FarFieldRole::FD;
  d.a = f.a - f_b.a;
  return d;
}

/// Scattering matrix in energy-normalized channel form:
/// block (i,j) = delta_ij I + (i/2pi) B_i^(1/2) W_b^inf(xihat_i, d_j) B_j^(1/2)
/// where B = k_p a_p P + k_s a_s (I - P) carries the P/S pair of the
/// continuous operator. With the alpha-normalized far-field patterns used
/// throughout this library, this is the form whose quadrature symmetrization
/// is unitary (checked against the discrete optical theorem); the i/(2 pi)
/// constant was pinned the same way.
inline FarFieldMatrix scattering_matrix(const FarFieldMatrix& f_b, const WaveNumbers& wn) {
  FarFieldMatrix s = f_b;
  s.role = FarFieldRole::Sb;
  const int n = f_b.n();
  s.a = CMatX::Identity(3 * n, 3 * n);
  const double sp = std::sqrt(wn.k_p * wn.alpha_p);
  const double ss = std::sqrt(wn.k_s * wn.alpha_s);
  std::vector<Mat3> bhalf(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 xh = f_b.grid.dirs[i];
    const Mat3 pp = xh * xh.transpose();
    bhalf[i] = sp * pp + ss * (Mat3::Identity() - pp);
  }
  const cplx c = iu / (2.0 * pi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s.block(i, j) += c * (bhalf[i].cast<cplx>() * f_b.block(i, j) * bhalf[j].cast<cplx>());
  return s;
}

/// ||S S* - I||_F / ||I||_F of the operator-frame scattering matrix.
inline double unitarity_defect(const FarFieldMatrix& s_b) {
  const CMatX shat = operator_frame(s_b);
  const int dim = s_b.dim();
  return (shat * shat.adjoint() - CMatX::Identity(dim, dim)).norm() / std::sqrt(double(dim));
}

/// Residual of the scattering identity relating the background response at a
/// point inside the scatterer to the scattering operator acting on its
/// complex conjugate: with row = component and column = polarization,
///   W_b(x,-xihat)^T = conj(W_b(x,xihat))^T
///                     + (i/2pi) int W_b^inf(xihat,d) B_d conj(W_b(x,d))^T dS_d.
inline double scattering_identity_residual(const Background& bg, const FarFieldMatrix& f_b,
                                            const Vec3& x) {
  require(!bg.homogeneous(), "scattering identity probe needs a scatterer");
  const DirectionGrid& grid = f_b.grid;
  const WaveNumbers& wn = bg.wn();
  auto& solver = bg.solver();
  std::vector<CMat3> wb(grid.size()), wbm(grid.size());
  for (int j = 0; j < grid.size(); ++j) {
    wb[j] = solver.total_field(bg.plane_solution(grid.dirs[j]), x);
    wbm[j] = solver.total_field(bg.plane_solution(Vec3(-grid.dirs[j])), x);
  }
  double err = 0, den = 0;
  for (int i = 0; i < grid.size(); ++i) {
    const Vec3 xh = grid.dirs[i];
    CMat3 acc = CMat3::Zero();
    for (int j = 0; j < grid.size(); ++j) {
      const Vec3 dh = grid.dirs[j];
      const Mat3 pp = dh * dh.transpose();
      const Mat3 b = wn.k_p * wn.alpha_p * pp + wn.k_s * wn.alpha_s * (Mat3::Identity() - pp);
      acc += grid.weights[j] * f_b.block(i, j) * b.cast<cplx>() *
             wb[j].transpose().conjugate();
    }
    const CMat3 rhs = wb[i].transpose().conjugate() + (iu / (2.0 * pi)) * acc;
    err += (wbm[i].transpose() - rhs).squaredNorm();
    den += wbm[i].squaredNorm();
    (void)xh;
  }
  return std::sqrt(err / den);
}

// ---------------------------------------------------------------------------
// Noise model
// ---------------------------------------------------------------------------

struct NoisyMatrix {
  FarFieldMatrix f_delta;
  double delta = 0.0;  // realized ||N F|| / ||F||
};

/// F_delta = (I + N_eps) F with N_eps entries independent complex uniform on
/// [-eps, eps]^2, drawn row-major from the seeded generator.
inline NoisyMatrix apply_noise(const FarFieldMatrix& f, double epsilon, std::uint64_t seed) {
  require(epsilon >= 0.0, "noise amplitude must be non-negative");
  NoisyMatrix out;
  out.f_delta = f;
  if (epsilon == 0.0) return out;
  const int dim = f.dim();
  CMatX noise(dim, dim);
  Rng rng(seed);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      noise(i, j) = cplx(rng.next_symmetric(epsilon), rng.next_symmetric(epsilon));
  CMatX nf = noise * f.a;
  const double fn = f.a.norm();
  out.delta = fn > 0 ? nf.norm() / fn : 0.0;
  out.f_delta.a = f.a + nf;
  return out;
}

/// Amplitude that realizes exactly the target relative noise measure for the
/// given seed (the noise matrix is linear in its amplitude).
inline double calibrate_epsilon(const FarFieldMatrix& f, double target_delta,
                                std::uint64_t seed) {
  require(target_delta >= 0.0, "target delta must be non-negative");
  if (target_delta == 0.0 || f.a.norm() == 0.0) return 0.0;
  const double unit = apply_noise(f, 1.0, seed).delta;
  return target_delta / unit;
}

// ---------------------------------------------------------------------------
// F-sharp and its eigensystem
// ---------------------------------------------------------------------------

struct EigenSystem {
  VecX mu;     // descending, clipped at zero
  CMatX psi;   // orthonormal columns
  std::uint64_t fingerprint = 0;

  int rank(double rel_cut = 1e-14) const {
    if (mu.size() == 0) return 0;
    const double cut = rel_cut * mu[0];
    int r = 0;
    while (r < mu.size() && mu[r] > cut) ++r;
    return r;
  }
};

struct FSharpResult {
  FarFieldMatrix f_sharp;  // operator-frame entries, Hermitian PSD
  EigenSystem eig;
  std::vector<std::string> warnings;
};

inline std::uint64_t matrix_fingerprint(const CMatX& a) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(a.data());
  const std::size_t nb = sizeof(cplx) * a.size();
  for (std::size_t i = 0; i < nb; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

/// F_tilde = S_b^* F_D in the operator frame; F# = |Re| + Im via Hermitian
/// eigendecompositions; negative eigenvalues are clipped at zero and the
/// returned matrix is the PSD reconstruction of the clipped eigensystem.
inline FSharpResult f_sharp(const FarFieldMatrix& f_d, const FarFieldMatrix& s_b) {
  require(f_d.compatible_with(s_b), "f_sharp: grid or frequency mismatch");
  FSharpResult out;
  const CMatX fd = operator_frame(f_d);
  const CMatX sb = operator_frame(s_b);
  const CMatX ftilde = sb.adjoint() * fd;
  const CMatX re = 0.5 * (ftilde + ftilde.adjoint());
  const CMatX im = (ftilde - ftilde.adjoint()) / (2.0 * iu);

  VecX re_evals;
  CMatX re_evecs;
  hermitian_eig(re, re_evals, re_evecs);
  const CMatX abs_re =
      re_evecs * re_evals.cwiseAbs().asDiagonal() * re_evecs.adjoint();
  CMatX fs = abs_re + im;
  fs = 0.5 * (fs + fs.adjoint()).eval();  // enforce exact Hermitian symmetry

  VecX evals;
  CMatX evecs;
  hermitian_eig(fs, evals, evecs);
  const double scale = fs.norm();
  if (evals.size() > 0 && evals.minCoeff() < -1e-8 * scale)
    out.warnings.push_back("f_sharp: negative eigenvalue beyond tolerance; data noise-dominated");

  const int n = static_cast<int>(evals.size());
  out.eig.mu.resize(n);
  out.eig.psi.resize(n, n);
  for (int i = 0; i < n; ++i) {  // descending, clipped
    out.eig.mu[i] = std::max(0.0, evals[n - 1 - i]);
    out.eig.psi.col(i) = evecs.col(n - 1 - i);
  }
  out.f_sharp = f_d;
  out.f_sharp.role = FarFieldRole::Fsharp;
  out.f_sharp.a =
      out.eig.psi * out.eig.mu.asDiagonal() * out.eig.psi.adjoint();
  out.eig.fingerprint = matrix_fingerprint(out.f_sharp.a);
  return out;
}

/// Hermitian PSD square root from the eigensystem.
inline CMatX sqrt_psd(const EigenSystem& eig) {
  return eig.psi * eig.mu.cwiseSqrt().asDiagonal() * eig.psi.adjoint();
}

inline CMatX sqrt_psd(const CMatX& a) {
  VecX evals;
  CMatX evecs;
  hermitian_eig(a, evals, evecs);
  return evecs * evals.cwiseMax(0.0).cwiseSqrt().asDiagonal() * evecs.adjoint();
}

// ---------------------------------------------------------------------------
// Trial right-hand sides
// ---------------------------------------------------------------------------

/// Far-field signature of a vanishing trial fracture at x0 with normal nu:
/// block i = (nu x nu) : C : grad W_b(x0, -xihat_i), the normal dyad
/// contraction of the background response gradient.
inline CVecX trial_far_field(const Background& bg, const DirectionGrid& grid, const Vec3& x0,
                             const Vec3& nu) {
  require(std::abs(nu.norm() - 1.0) <= 1e-9, "trial normal must be a unit vector");
  CVecX phi(3 * grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    if (bg.homogeneous()) {
      phi.segment<3>(3 * i) =
          dl_far_kernel(grid.dirs[i], x0, nu, bg.wn()) * nu.cast<cplx>();
    } else {
      const CMat3 t = bg.traction_tensor(x0, nu, Vec3(-grid.dirs[i]));
      phi.segment<3>(3 * i) = t.transpose() * nu.cast<cplx>();
    }
  }
  return phi;
}

/// b = S_b^* Phi^inf in raw-frame nodal values. For the homogeneous
/// background S_b = I and b equals Phi^inf exactly.
inline CVecX trial_rhs(const Background& bg, const DirectionGrid& grid, const Vec3& x0,
                       const Vec3& nu, const FarFieldMatrix& s_b) {
  const CVecX phi = trial_far_field(bg, grid, x0, nu);
  const ChannelFrame f = ChannelFrame::make(grid, bg.wn());
  const CMatX sb = operator_frame(s_b);
  const CVecX bhat = sb.adjoint() * f.lift(phi);
  return f.lower(bhat);
}

// ---------------------------------------------------------------------------
// Regularized solvers
// ---------------------------------------------------------------------------

struct TikhonovResult {
  CVecX g;
  double alpha = 0.0;
  bool attainable = true;  // false when the discrepancy cannot reach delta |b|
};

/// Minimizes |A g - b|^2 + alpha |g|^2 for A = F#^(1/2) given the eigensystem
/// of F#, with alpha from the Morozov principle |A g - b| = delta |b|.
inline TikhonovResult tikhonov_morozov(const EigenSystem& eig, const CVecX& b, double delta) {
  require(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
  TikhonovResult out;
  const CVecX beta = eig.psi.adjoint() * b;
  const double bnorm = b.norm();
  const int n = static_cast<int>(eig.mu.size());
  if (bnorm == 0.0) {
    out.g = CVecX::Zero(n);
    out.alpha = 0.0;
    return out;
  }
  auto residual2 = [&](double alpha) {
    double r = 0;
    for (int i = 0; i < n; ++i) {
      const double mu = eig.mu[i];
      const double fac = (mu + alpha > 0) ? alpha / (mu + alpha) : 1.0;
      r += std::norm(beta[i]) * fac * fac;
    }
    return r;
  };
  const double target = delta * bnorm;
  // residual at alpha -> 0: mass on the null space only
  double r0 = 0;
  for (int i = 0; i < n; ++i)
    if (eig.mu[i] <= 0.0) r0 += std::norm(beta[i]);
  if (std::sqrt(r0) >= target && delta > 0.0) out.attainable = false;
  double alpha = 0.0;
  if (delta > 0.0 && out.attainable) {
    double lo = 1e-300, hi = std::max(1.0, eig.mu.maxCoeff());
    while (std::sqrt(residual2(hi)) < target && hi < 1e300) hi *= 4.0;
    // bisection on log(alpha); the discrepancy is monotone increasing
    for (int it = 0; it < 400; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (std::sqrt(residual2(mid)) < target)
        lo = mid;
      else
        hi = mid;
      if (hi / lo < 1.0 + 1e-15) break;
    }
    alpha = std::sqrt(lo * hi);
  }
  out.alpha = out.attainable ? alpha : 0.0;
  CVecX coef(n);
  for (int i = 0; i < n; ++i) {
    const double mu = eig.mu[i];
    const double s = std::sqrt(mu);
    coef[i] = (mu + out.alpha > 0) ? beta[i] * s / (mu + out.alpha) : cplx(0);
  }
  out.g = eig.psi * coef;
  return out;
}

/// Truncated Picard series |g^P|^2 = sum_{l < N_P} |<b, Psi_l>|^2 / mu_l over
/// the leading eigenvalues; eigenvalues below 1e-14 mu_max are excluded.
inline double picard_norm(const EigenSystem& eig, const CVecX& b, int n_p) {
  require(n_p >= 1 && n_p <= eig.mu.size(), "Picard truncation out of range");
  const int usable = eig.rank();
  if (usable == 0) throw ValidationError("picard_norm: empty spectrum");
  const int m = std::min(n_p, usable);
  double s = 0;
  for (int i = 0; i < m; ++i) {
    const cplx beta = eig.psi.col(i).dot(b);
    s += std::norm(beta) / eig.mu[i];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Indicator maps
// ---------------------------------------------------------------------------

enum class InversionMethod { Tikhonov, Picard };

struct IndicatorMap {
  SamplingSurface surface;
  VecX values;       // I^F per sampling point
  VecX alpha_or_np;  // Morozov alpha or Picard truncation per point
  double tau = 0.0;
  std::vector<bool> mask;
  VecX truncated;
};

struct IndicatorOptions {
  InversionMethod method = InversionMethod::Tikhonov;
  double delta = 0.0;   // noise level for Morozov
  int picard_np = 0;    // 0: noise-floor rule mu_l >= delta mu_1
};

/// Evaluates I^F(x) = 1 / |g| over all sampling points with one shared
/// eigendecomposition; right-hand sides are batched into a single block.
inline IndicatorMap indicator_map(const FSharpResult& fs, const FarFieldMatrix& s_b,
                                  const Background& bg, const SamplingSurface& sampling,
                                  const IndicatorOptions& opt) {
  IndicatorMap map;
  map.surface = sampling;
  const int m = sampling.size();
  map.values.resize(m);
  map.alpha_or_np.resize(m);
  const DirectionGrid& grid = fs.f_sharp.grid;
  const ChannelFrame fr = ChannelFrame::make(grid, bg.wn());
  const CMatX sb = operator_frame(s_b);

  // batched right-hand block: bhat = S^* Lambda Phi for all points
  CMatX phi(3 * grid.size(), m);
  for (int p = 0; p < m; ++p)
    phi.col(p) = trial_far_field(bg, grid, sampling.points[p], sampling.normals[p]);
  CMatX bhat = sb.adjoint() * fr.lift_cols(phi);

  if (opt.method == InversionMethod::Tikhonov) {
    for (int p = 0; p < m; ++p) {
      auto r = tikhonov_morozov(fs.eig, bhat.col(p), opt.delta);
      map.values[p] = 1.0 / r.g.norm();
      map.alpha_or_np[p] = r.alpha;
    }
  } else {
    int np = opt.picard_np;
    if (np <= 0) {
      // noise-floor rule: largest l with mu_l >= delta mu_1
      np = 1;
      while (np < fs.eig.mu.size() && fs.eig.mu[np] >= opt.delta * fs.eig.mu[0]) ++np;
    }
    np = std::max(1, std::min<int>(np, fs.eig.rank()));
    const CMatX proj = fs.eig.psi.leftCols(np).adjoint() * bhat;  // np x m
    for (int p = 0; p < m; ++p) {
      double s = 0;
      for (int i = 0; i < np; ++i) s += std::norm(proj(i, p)) / fs.eig.mu[i];
      map.values[p] = 1.0 / std::sqrt(s);
      map.alpha_or_np[p] = np;
    }
  }
  map.mask.assign(m, true);
  map.truncated = map.values;
  return map;
}

/// Mask = [ I^F > tau * max(I^F) ]; truncated values are masked I^F.
inline IndicatorMap threshold(IndicatorMap map, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  map.tau = tau;
  const double cut = tau * map.values.maxCoeff();
  for (int p = 0; p < map.values.size(); ++p) {
    map.mask[p] = map.values[p] > cut;
    map.truncated[p] = map.mask[p] ? map.values[p] : 0.0;
  }
  return map;
}

}  // namespace elastofm
