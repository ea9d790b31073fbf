#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they are used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "elastofm/common.hpp"
#include "elastofm/medium.hpp"

namespace oracles {

using elastofm::cplx;
using elastofm::CMat3;
using elastofm::CMatX;
using elastofm::CVec3;
using elastofm::Vec3;
using elastofm::VecX;

using VecField = std::function<CVec3(const Vec3&)>;

// 4th-order central first derivative of a vector field.
inline CVec3 d1(const VecField& u, const Vec3& x, int dir, double h) {
  Vec3 e = Vec3::Zero();
  e[dir] = 1.0;
  return (-u(x + 2 * h * e) + 8.0 * u(x + h * e) - 8.0 * u(x - h * e) + u(x - 2 * h * e)) /
         (12.0 * h);
}

// 4th-order pure second derivative.
inline CVec3 d2(const VecField& u, const Vec3& x, int dir, double h) {
  Vec3 e = Vec3::Zero();
  e[dir] = 1.0;
  return (-u(x + 2 * h * e) + 16.0 * u(x + h * e) - 30.0 * u(x) + 16.0 * u(x - h * e) -
          u(x - 2 * h * e)) /
         (12.0 * h * h);
}

// Mixed second derivative by nesting 4th-order first-derivative stencils.
inline CVec3 d2_mixed(const VecField& u, const Vec3& x, int a, int b, double h) {
  auto du_b = [&](const Vec3& y) { return d1(u, y, b, h); };
  Vec3 e = Vec3::Zero();
  e[a] = 1.0;
  return (-du_b(x + 2 * h * e) + 8.0 * du_b(x + h * e) - 8.0 * du_b(x - h * e) +
          du_b(x - 2 * h * e)) /
         (12.0 * h);
}

/// Relative residual of the homogeneous Navier equation
/// (lambda+mu) grad div u + mu lap u + rho w^2 u at x.
inline double navier_residual(const VecField& u, const Vec3& x, const elastofm::ElasticMedium& m,
                              double omega, double h) {
  CMat3 hess[3];  // hess[c](i,j) = d^2 u_i / dx_c dx_j ... assembled below
  CVec3 lap = CVec3::Zero();
  CVec3 graddiv = CVec3::Zero();
  // laplacian
  for (int c = 0; c < 3; ++c) lap += d2(u, x, c, h);
  // grad(div u)_i = sum_j d^2 u_j / dx_i dx_j
  for (int i = 0; i < 3; ++i) {
    cplx s = 0;
    for (int j = 0; j < 3; ++j) {
      CVec3 v = (i == j) ? d2(u, x, j, h) : d2_mixed(u, x, i, j, h);
      s += v[j];
    }
    graddiv[i] = s;
  }
  (void)hess;
  const CVec3 res =
      (m.lambda + m.mu) * graddiv + m.mu * lap + m.rho * omega * omega * u(x).eval();
  const double scale = m.rho * omega * omega * u(x).norm() + m.mu * lap.norm() + 1e-300;
  return res.norm() / scale;
}

inline double curl_residual(const VecField& u, const Vec3& x, double h) {
  CVec3 c;
  CVec3 dux = d1(u, x, 0, h), duy = d1(u, x, 1, h), duz = d1(u, x, 2, h);
  c[0] = duy[2] - duz[1];
  c[1] = duz[0] - dux[2];
  c[2] = dux[1] - duy[0];
  double scale = dux.norm() + duy.norm() + duz.norm() + 1e-300;
  return c.norm() / scale;
}

inline double div_residual(const VecField& u, const Vec3& x, double h) {
  CVec3 dux = d1(u, x, 0, h), duy = d1(u, x, 1, h), duz = d1(u, x, 2, h);
  cplx d = dux[0] + duy[1] + duz[2];
  double scale = dux.norm() + duy.norm() + duz.norm() + 1e-300;
  return std::abs(d) / scale;
}

/// Independent dense Hermitian eigensolver (cyclic complex Jacobi), used as
/// an oracle against the production eigendecomposition.
inline void jacobi_hermitian(CMatX a, VecX& evals, CMatX& evecs) {
  const int n = static_cast<int>(a.rows());
  evecs = CMatX::Identity(n, n);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off < 1e-28 * n * n) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = std::real(a(p, p)), aqq = std::real(a(q, q));
        // diagonalize the 2x2 Hermitian block [[app, apq],[conj(apq), aqq]]
        const double absa = std::abs(apq);
        const cplx phase = apq / absa;
        const double tau = (aqq - app) / (2.0 * absa);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double cth = 1.0 / std::sqrt(1.0 + t * t);
        const double sth = t * cth;
        const cplx s = sth * phase;
        for (int k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = cth * akp - std::conj(s) * akq;
          a(k, q) = s * akp + cth * akq;
        }
        for (int k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = cth * apk - s * aqk;
          a(q, k) = std::conj(s) * apk + cth * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const cplx vkp = evecs(k, p), vkq = evecs(k, q);
          evecs(k, p) = cth * vkp - std::conj(s) * vkq;
          evecs(k, q) = s * vkp + cth * vkq;
        }
      }
    }
  }
  evals.resize(n);
  for (int i = 0; i < n; ++i) evals[i] = std::real(a(i, i));
  // sort ascending
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return evals[i] < evals[j]; });
  VecX ev = evals;
  CMatX V = evecs;
  for (int i = 0; i < n; ++i) {
    evals[i] = ev[idx[i]];
    evecs.col(i) = V.col(idx[i]);
  }
}

}  // namespace oracles
