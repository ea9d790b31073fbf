#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "elastofm/common.hpp"

namespace elastofm {

struct QuadPoint {
  Vec3 x;
  double w;         // includes the area jacobian
  double b0, b1, b2;  // barycentric coordinates
};

namespace quad {

struct BaryRule {
  std::vector<std::array<double, 4>> pw;  // (b0, b1, b2, weight), weights sum to 1
};

inline const BaryRule& tri_rule(int degree) {
  static const BaryRule deg1{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}}};
  static const BaryRule deg2{{{2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3},
                              {1.0 / 6, 2.0 / 3, 1.0 / 6, 1.0 / 3},
                              {1.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3}}};
  static const BaryRule deg5 = [] {
    BaryRule r;
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    r.pw.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225});
    r.pw.push_back({a1, b1, b1, w1});
    r.pw.push_back({b1, a1, b1, w1});
    r.pw.push_back({b1, b1, a1, w1});
    r.pw.push_back({a2, b2, b2, w2});
    r.pw.push_back({b2, a2, b2, w2});
    r.pw.push_back({b2, b2, a2, w2});
    return r;
  }();
  if (degree <= 1) return deg1;
  if (degree <= 2) return deg2;
  return deg5;
}

inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  // nodes/weights on [0,1] by Newton iteration on Legendre polynomials
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[n - 1 - i] = 0.5 * (1.0 + t);
    w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace quad

/// Gauss points on a flat triangle; weights include the area.
inline void tri_gauss(const Vec3& p0, const Vec3& p1, const Vec3& p2, int degree,
                      std::vector<QuadPoint>& out) {
  const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
  for (const auto& pw : quad::tri_rule(degree).pw) {
    QuadPoint q;
    q.b0 = pw[0];
    q.b1 = pw[1];
    q.b2 = pw[2];
    q.x = pw[0] * p0 + pw[1] * p1 + pw[2] * p2;
    q.w = pw[3] * area;
    out.push_back(q);
  }
}

/// Duffy-type quadrature clustering at p0; exact jacobian removes a 1/r
/// singularity at p0. n x n tensor Gauss on the unit square.
inline void tri_duffy(const Vec3& p0, const Vec3& p1, const Vec3& p2, int n,
                      std::vector<QuadPoint>& out) {
  static thread_local std::vector<double> gx, gw;
  static thread_local int cached_n = -1;
  if (cached_n != n) {
    quad::gauss_legendre_01(n, gx, gw);
    cached_n = n;
  }
  const Vec3 e1 = p1 - p0, e2 = p2 - p0;
  const double twoA = e1.cross(e2).norm();
  for (int i = 0; i < n; ++i) {
    const double u = gx[i];
    for (int j = 0; j < n; ++j) {
      const double v = gx[j];
      QuadPoint q;
      const double b1 = u * (1.0 - v), b2 = u * v;
      q.b0 = 1.0 - b1 - b2;
      q.b1 = b1;
      q.b2 = b2;
      q.x = p0 + b1 * e1 + b2 * e2;
      q.w = gw[i] * gw[j] * u * twoA;
      out.push_back(q);
    }
  }
}

/// Barycentric coordinates of a point in the plane of a flat triangle.
/// Subdivided quadrature points carry child-local coordinates, so callers
/// evaluating parent shape functions recover them from the position.
inline void barycentric_in(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& x,
                           double& b0, double& b1, double& b2) {
  const Vec3 e1 = p1 - p0, e2 = p2 - p0, d = x - p0;
  const double a11 = e1.dot(e1), a12 = e1.dot(e2), a22 = e2.dot(e2);
  const double r1 = e1.dot(d), r2 = e2.dot(d);
  const double det = a11 * a22 - a12 * a12;
  b1 = (a22 * r1 - a12 * r2) / det;
  b2 = (a11 * r2 - a12 * r1) / det;
  b0 = 1.0 - b1 - b2;
}

/// Quadrature for int_T f(y) dS with f weakly singular at x0 (possibly on or
/// near T): near elements are subdivided until well separated from x0;
/// elements containing-or-touching x0 at a vertex are handled with Duffy.
template <class F>
void integrate_near_singular(const Vec3& x0, const Vec3& p0, const Vec3& p1, const Vec3& p2,
                             F&& accumulate, int depth = 0) {
  const double diam = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
  const Vec3 c = (p0 + p1 + p2) / 3.0;
  const double dist = (x0 - c).norm();
  std::vector<QuadPoint> pts;
  // vertex-singular: Duffy directly
  const double tol = 1e-12 * (1.0 + diam);
  if ((x0 - p0).norm() < tol) {
    tri_duffy(p0, p1, p2, 6, pts);
  } else if ((x0 - p1).norm() < tol) {
    tri_duffy(p1, p2, p0, 6, pts);
  } else if ((x0 - p2).norm() < tol) {
    tri_duffy(p2, p0, p1, 6, pts);
  } else if (dist > 1.2 * diam || depth >= 6) {
    tri_gauss(p0, p1, p2, 5, pts);
  } else {
    const Vec3 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m20 = 0.5 * (p2 + p0);
    integrate_near_singular(x0, p0, m01, m20, accumulate, depth + 1);
    integrate_near_singular(x0, m01, p1, m12, accumulate, depth + 1);
    integrate_near_singular(x0, m20, m12, p2, accumulate, depth + 1);
    integrate_near_singular(x0, m01, m12, m20, accumulate, depth + 1);
    return;
  }
  for (const auto& q : pts) accumulate(q);
}

}  // namespace elastofm
