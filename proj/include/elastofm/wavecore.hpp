#pragma once

#include <array>
#include <cmath>

#include "elastofm/common.hpp"
#include "elastofm/grid.hpp"
#include "elastofm/medium.hpp"

namespace elastofm {

inline constexpr double kMinSeparation = 1e-10;

inline void require_unit(const Vec3& v, const char* name, double tol = 1e-9) {
  require(std::abs(v.norm() - 1.0) <= tol, std::string(name) + " must be a unit vector");
}

// ---------------------------------------------------------------------------
// Radial kernel toolkit. phi_hat(k, r) = exp(i k r) / (4 pi r), and chi is the
// P/S difference whose small-r evaluation needs a series to avoid
// cancellation: chi(r) = (exp(i k_s r) - exp(i k_p r)) / (4 pi r).
// ---------------------------------------------------------------------------

struct RadialPhi {
  cplx f, d1, d2, d3;
};

inline RadialPhi radial_phi(double k, double r) {
  const cplx e = std::exp(iu * k * r);
  const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;
  const cplx ikr = iu * k * r;
  RadialPhi p;
  const double c = 1.0 / (4.0 * pi);
  p.f = c * e / r;
  p.d1 = c * (ikr - 1.0) * e / r2;
  p.d2 = c * (-k * k * r2 - 2.0 * ikr + 2.0) * e / r3;
  p.d3 = c * (-iu * k * k * k * r3 + 3.0 * k * k * r2 + 6.0 * ikr - 6.0) * e / r4;
  return p;
}

struct RadialChi {
  cplx f, d1, d2, d3;
};

inline RadialChi radial_chi(double k_p, double k_s, double r) {
  RadialChi c;
  const double kmax = std::max(std::abs(k_p), std::abs(k_s));
  if (kmax * r < 0.05) {
    // chi = sum_{m>=1} D_m r^{m-1}/m! / (4 pi), D_m = (i k_s)^m - (i k_p)^m
    cplx ps = iu * k_s, pp = iu * k_p;  // current powers (i k)^m
    cplx f = 0, d1 = 0, d2 = 0, d3 = 0;
    double fact = 1.0;                      // m!
    double r0 = 1.0, r1 = 1.0, r2 = 1.0, r3 = 1.0;  // r^{m-1}, r^{m-2}, ...
    for (int m = 1; m <= 24; ++m) {
      fact *= m;
      const cplx dm = (ps - pp) / fact;
      f += dm * r0;
      if (m >= 2) d1 += dm * double(m - 1) * r1;
      if (m >= 3) d2 += dm * double((m - 1) * (m - 2)) * r2;
      if (m >= 4) d3 += dm * double((m - 1) * (m - 2) * (m - 3)) * r3;
      ps *= iu * k_s;
      pp *= iu * k_p;
      if (m >= 4) r3 *= r;
      if (m >= 3) r2 *= r;
      if (m >= 2) r1 *= r;
      r0 *= r;
    }
    const double c4 = 1.0 / (4.0 * pi);
    c.f = c4 * f;
    c.d1 = c4 * d1;
    c.d2 = c4 * d2;
    c.d3 = c4 * d3;
    return c;
  }
  const RadialPhi s = radial_phi(k_s, r), p = radial_phi(k_p, r);
  c.f = s.f - p.f;
  c.d1 = s.d1 - p.d1;
  c.d2 = s.d2 - p.d2;
  c.d3 = s.d3 - p.d3;
  return c;
}

// ---------------------------------------------------------------------------
// Plane waves
// ---------------------------------------------------------------------------

/// W(xi, d) = exp(i k_s xi.d)(I - d d^T) + exp(i k_p xi.d) d d^T
inline CMat3 plane_wave_tensor(const Vec3& xi, const Vec3& d, const WaveNumbers& wn) {
  require(std::abs(d.norm() - 1.0) <= 1e-12, "d must be a unit vector");
  const double xd = xi.dot(d);
  const cplx es = std::exp(iu * wn.k_s * xd);
  const cplx ep = std::exp(iu * wn.k_p * xd);
  const Mat3 dd = d * d.transpose();
  return es * (Mat3::Identity() - dd) + ep * dd;
}

/// G[c](i,m) = d W_im / d xi_c
inline std::array<CMat3, 3> plane_wave_gradient(const Vec3& xi, const Vec3& d,
                                                const WaveNumbers& wn) {
  require(std::abs(d.norm() - 1.0) <= 1e-12, "d must be a unit vector");
  const double xd = xi.dot(d);
  const cplx es = std::exp(iu * wn.k_s * xd);
  const cplx ep = std::exp(iu * wn.k_p * xd);
  const Mat3 dd = d * d.transpose();
  const CMat3 sterm = iu * wn.k_s * es * (Mat3::Identity() - dd);
  const CMat3 pterm = iu * wn.k_p * ep * dd;
  std::array<CMat3, 3> g;
  for (int c = 0; c < 3; ++c) g[c] = d[c] * (sterm + pterm);
  return g;
}

// ---------------------------------------------------------------------------
// Tractions
// ---------------------------------------------------------------------------

/// Co-normal derivative of a displacement field from its Jacobian
/// J(i,j) = du_i/dx_j: t = lambda tr(J) nu + mu (J + J^T) nu.
inline CVec3 traction(const CMat3& grad_u, const Vec3& nu, const ElasticMedium& m) {
  require_unit(nu, "nu");
  const cplx div = grad_u.trace();
  return m.lambda * div * nu + m.mu * ((grad_u + grad_u.transpose()) * nu);
}

/// Columnwise traction of a matrix field from its gradient
/// G[c](i,m) = d W_im / d x_c. Returns T(i,m) = traction component i of
/// column m.
inline CMat3 traction_columns(const std::array<CMat3, 3>& g, const Vec3& nu,
                              const ElasticMedium& m) {
  CMat3 t;
  for (int col = 0; col < 3; ++col) {
    CMat3 jac;  // jac(i,c) = d W_{i,col} / d x_c
    for (int c = 0; c < 3; ++c) jac.col(c) = g[c].col(col);
    const cplx div = jac.trace();
    t.col(col) = m.lambda * div * nu + m.mu * ((jac + jac.transpose()) * nu);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Kupradze matrix (radiating fundamental tensor of the exterior medium)
// G(z) = phi_s/mu I + (1/(rho w^2)) grad grad (phi_s - phi_p), z = xi - x.
// The grad-grad coefficient is fixed by the distributional Navier equation.
// ---------------------------------------------------------------------------

inline CMat3 kupradze(const Vec3& xi, const Vec3& x, const WaveNumbers& wn) {
  const Vec3 z = xi - x;
  const double r = z.norm();
  if (r < kMinSeparation)
    throw SingularityError("kupradze: source and field points closer than 1e-10");
  const Vec3 zh = z / r;
  const RadialPhi ps = radial_phi(wn.k_s, r);
  const RadialChi ch = radial_chi(wn.k_p, wn.k_s, r);
  const double rw2 = wn.rho_omega2();
  const cplx g1 = ch.d1 / r;
  const cplx g2 = ch.d2 - ch.d1 / r;
  return (ps.f / wn.exterior.mu + g1 / rw2) * Mat3::Identity() +
         (g2 / rw2) * (zh * zh.transpose());
}

/// Gc[c](i,n) = d G_in / d z_c at z = xi - x.
inline std::array<CMat3, 3> kupradze_gradient(const Vec3& xi, const Vec3& x,
                                              const WaveNumbers& wn) {
  const Vec3 z = xi - x;
  const double r = z.norm();
  if (r < kMinSeparation)
    throw SingularityError("kupradze_gradient: source and field points closer than 1e-10");
  const Vec3 zh = z / r;
  const RadialPhi ps = radial_phi(wn.k_s, r);
  const RadialChi ch = radial_chi(wn.k_p, wn.k_s, r);
  const double rw2 = wn.rho_omega2();
  const double r2 = r * r;
  // Hessian of chi = g1 I + g2 z z^T with g1 = chi'/r, g2 = (chi'' - chi'/r)/r^2.
  const cplx g1 = ch.d1 / r;
  const cplx g2 = (ch.d2 - ch.d1 / r) / r2;
  const cplx dg1 = (ch.d2 * r - ch.d1) / r2;                                // g1'
  const cplx dg2 = ch.d3 / r2 - 3.0 * ch.d2 / (r2 * r) + 3.0 * ch.d1 / (r2 * r2);  // g2'
  const Mat3 I = Mat3::Identity();
  std::array<CMat3, 3> out;
  for (int c = 0; c < 3; ++c) {
    CMat3 m = (ps.d1 * zh[c] / wn.exterior.mu) * I;
    m += (dg1 * zh[c] / rw2) * I;
    m += (dg2 * zh[c] / rw2) * (z * z.transpose());
    CMat3 sym = CMat3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int n = 0; n < 3; ++n) sym(i, n) = (c == i ? z[n] : 0.0) + (c == n ? z[i] : 0.0);
    m += (g2 / rw2) * sym;
    out[c] = m;
  }
  return out;
}

/// Far-field pattern of the Kupradze matrix, P and S parts.
struct KupradzeFarField {
  CMat3 P;  // e^{-i k_p xihat.x} xihat xihat^T
  CMat3 S;  // e^{-i k_s xihat.x} (I - xihat xihat^T)
  CMat3 total() const { return P + S; }
};

inline KupradzeFarField kupradze_far_field(const Vec3& xihat, const Vec3& x,
                                           const WaveNumbers& wn) {
  require(std::abs(xihat.norm() - 1.0) <= 1e-12, "xihat must be a unit vector");
  const Mat3 xx = xihat * xihat.transpose();
  KupradzeFarField ff;
  ff.P = std::exp(-iu * wn.k_p * xihat.dot(x)) * xx;
  ff.S = std::exp(-iu * wn.k_s * xihat.dot(x)) * (Mat3::Identity() - xx);
  return ff;
}

// ---------------------------------------------------------------------------
// Double-layer kernels: the field radiated by a displacement jump.
// dl_kernel(x, y, nu) is N with u_n(x) = int N(x,y)_{n i} [u]_i(y) dS_y;
// N_{ni} = nu_j C_{ijkl} dG_{nk}/dy_l evaluated for the given medium.
// ---------------------------------------------------------------------------

inline CMat3 dl_kernel(const Vec3& x, const Vec3& y, const Vec3& nu_y, const WaveNumbers& wn) {
  const auto gc = kupradze_gradient(x, y, wn);  // derivatives w.r.t. z = x - y
  const double la = wn.exterior.lambda, mu = wn.exterior.mu;
  CMat3 n;
  // N_{ni} = -[ lambda nu_i sum_k Gc[k](n,k) + mu ( sum_l nu_l Gc[l](n,i)
  //            + sum_k nu_k Gc[i](n,k) ) ]   (d/dy = -d/dz)
  for (int nn = 0; nn < 3; ++nn) {
    cplx divg = gc[0](nn, 0) + gc[1](nn, 1) + gc[2](nn, 2);
    for (int i = 0; i < 3; ++i) {
      cplx dn = 0, b = 0;
      for (int l = 0; l < 3; ++l) dn += nu_y[l] * gc[l](nn, i);
      for (int k = 0; k < 3; ++k) b += nu_y[k] * gc[i](nn, k);
      n(nn, i) = -(la * nu_y[i] * divg + mu * (dn + b));
    }
  }
  return n;
}

/// Static (Kelvin) counterpart of dl_kernel, used for rigid-body
/// regularization of the strongly singular collocation integrals.
inline CMat3 dl_kernel_static(const Vec3& x, const Vec3& y, const Vec3& nu_y,
                              const ElasticMedium& med) {
  const Vec3 z = x - y;
  const double r = z.norm();
  if (r < kMinSeparation) throw SingularityError("dl_kernel_static: coincident points");
  const double la = med.lambda, mu = med.mu;
  const double nupois = la / (2.0 * (la + mu));
  const double A = (3.0 - 4.0 * nupois) / (16.0 * pi * mu * (1.0 - nupois));
  const double B = 1.0 / (16.0 * pi * mu * (1.0 - nupois));
  const double r3 = r * r * r, r5 = r3 * r * r;
  // Gc[c](i,n) = d G_in / d z_c
  std::array<Mat3, 3> gc;
  for (int c = 0; c < 3; ++c) {
    Mat3 m = (-A * z[c] / r3) * Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int nn = 0; nn < 3; ++nn)
        m(i, nn) += B * (((c == i) ? z[nn] : 0.0) + ((c == nn) ? z[i] : 0.0)) / r3 -
                    3.0 * B * z[i] * z[nn] * z[c] / r5;
    gc[c] = m;
  }
  CMat3 n;
  for (int nn = 0; nn < 3; ++nn) {
    double divg = gc[0](nn, 0) + gc[1](nn, 1) + gc[2](nn, 2);
    for (int i = 0; i < 3; ++i) {
      double dn = 0, b = 0;
      for (int l = 0; l < 3; ++l) dn += nu_y[l] * gc[l](nn, i);
      for (int k = 0; k < 3; ++k) b += nu_y[k] * gc[i](nn, k);
      n(nn, i) = -(la * nu_y[i] * divg + mu * (dn + b));
    }
  }
  return n;
}

/// Far-field pattern of the double-layer kernel: the pattern at direction
/// xihat radiated by a point displacement jump at y. Equal to the transpose
/// of the columnwise traction of W(y, -xihat).
inline CMat3 dl_far_kernel(const Vec3& xihat, const Vec3& y, const Vec3& nu_y,
                           const WaveNumbers& wn) {
  const auto g = plane_wave_gradient(y, Vec3(-xihat), wn);
  return traction_columns(g, nu_y, wn.exterior).transpose();
}

// ---------------------------------------------------------------------------
// Herglotz wave functions
// ---------------------------------------------------------------------------

/// Density on a direction grid with its P/S split, g = g_p + g_s,
/// g_p(d) = (d d^T) g parallel to d and g_s = g - g_p orthogonal.
struct HerglotzDensity {
  const DirectionGrid* grid = nullptr;
  std::vector<CVec3> g;

  CVec3 g_p(int j) const { return grid->dirs[j].cast<cplx>().dot(g[j]) * grid->dirs[j]; }
  CVec3 g_s(int j) const { return g[j] - g_p(j); }
};

/// Quadrature approximation of the elastic Herglotz wave function
/// int g_p e^{i k_p d.xi} + g_s e^{i k_s d.xi} dS_d.
inline CVec3 herglotz_field(const HerglotzDensity& den, const Vec3& xi, const WaveNumbers& wn) {
  require(den.grid != nullptr, "herglotz density must reference a grid");
  CVec3 u = CVec3::Zero();
  const auto& grid = *den.grid;
  for (int j = 0; j < grid.size(); ++j) {
    u += grid.weights[j] * (plane_wave_tensor(xi, grid.dirs[j], wn) * den.g[j]);
  }
  return u;
}

}  // namespace elastofm
