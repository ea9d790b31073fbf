#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "elastofm/common.hpp"

namespace elastofm {

enum class SurfaceKind { Sphere, Ellipsoid, Cube, PlanarPatch };

inline SurfaceKind surface_kind_from(const std::string& s) {
  if (s == "sphere") return SurfaceKind::Sphere;
  if (s == "ellipsoid") return SurfaceKind::Ellipsoid;
  if (s == "cube") return SurfaceKind::Cube;
  if (s == "planar-patch") return SurfaceKind::PlanarPatch;
  throw ValidationError("unknown surface kind: " + s);
}

/// Cloud of sampling positions with exact outward normals, used as trial
/// fracture locations.
struct SamplingSurface {
  SurfaceKind kind = SurfaceKind::Sphere;
  Vec3 center = Vec3::Zero();
  Vec3 params = Vec3::Zero();  // radius / semi-axes / side / patch half-spans
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<bool> truth;  // optional: flags points on the true crack

  int size() const { return static_cast<int>(points.size()); }
};

struct SurfaceSpec {
  SurfaceKind kind;
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Ones();  // ellipsoid
  double radius = 1.0;            // sphere
  double side = 1.0;              // cube
  Vec3 normal = Vec3(0, 0, 1);    // planar patch
  double half_u = 1.0, half_v = 1.0;
};

/// Lattice sampling of a parametric surface. Counts are (n_u, n_v): polar x
/// azimuthal for sphere/ellipsoid, per-face lattice for the cube, in-plane
/// lattice for a planar patch. Cube points sit strictly inside open faces.
inline SamplingSurface parametric_surface(const SurfaceSpec& spec, int n_u, int n_v) {
  require(n_u >= 2 && n_v >= 2, "sampling counts must be >= 2 (>= 4 points)");
  SamplingSurface s;
  s.kind = spec.kind;
  s.center = spec.center;
  switch (spec.kind) {
    case SurfaceKind::Sphere: {
      require(spec.radius > 0.0, "sphere radius must be positive");
      s.params = Vec3(spec.radius, 0, 0);
      for (int j = 0; j < n_u; ++j) {
        const double th = (j + 0.5) * pi / n_u;
        for (int k = 0; k < n_v; ++k) {
          const double ph = 2.0 * pi * k / n_v;
          const Vec3 d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                       std::cos(th));
          s.points.push_back(spec.center + spec.radius * d);
          s.normals.push_back(d);
        }
      }
      break;
    }
    case SurfaceKind::Ellipsoid: {
      require(spec.semi_axes.minCoeff() > 0.0, "ellipsoid semi-axes must be positive");
      s.params = spec.semi_axes;
      for (int j = 0; j < n_u; ++j) {
        const double th = (j + 0.5) * pi / n_u;
        for (int k = 0; k < n_v; ++k) {
          const double ph = 2.0 * pi * k / n_v;
          const Vec3 d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                       std::cos(th));
          s.points.push_back(spec.center + Vec3(spec.semi_axes[0] * d[0],
                                                spec.semi_axes[1] * d[1],
                                                spec.semi_axes[2] * d[2]));
          Vec3 nrm(d[0] / spec.semi_axes[0], d[1] / spec.semi_axes[1],
                   d[2] / spec.semi_axes[2]);
          s.normals.push_back(nrm.normalized());
        }
      }
      break;
    }
    case SurfaceKind::Cube: {
      require(spec.side > 0.0, "cube side must be positive");
      s.params = Vec3(spec.side, 0, 0);
      const double h = spec.side / 2.0;
      const Vec3 face_n[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      for (const auto& fn : face_n) {
        Vec3 e1 = (std::abs(fn[0]) > 0.5) ? Vec3(0, 1, 0) : Vec3(1, 0, 0);
        Vec3 e2 = fn.cross(e1);
        for (int a = 0; a < n_u; ++a) {
          for (int b = 0; b < n_v; ++b) {
            const double ua = -h + spec.side * (a + 0.5) / n_u;
            const double vb = -h + spec.side * (b + 0.5) / n_v;
            s.points.push_back(spec.center + h * fn + ua * e1 + vb * e2);
            s.normals.push_back(fn);
          }
        }
      }
      break;
    }
    case SurfaceKind::PlanarPatch: {
      require(spec.normal.norm() > 1e-12, "patch normal must be nonzero");
      require(spec.half_u > 0.0 && spec.half_v > 0.0, "patch half-spans must be positive");
      s.params = Vec3(spec.half_u, spec.half_v, 0);
      const Vec3 n = spec.normal.normalized();
      Vec3 e1 = (std::abs(n[0]) < 0.9) ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
      e1 = (e1 - e1.dot(n) * n).normalized();
      const Vec3 e2 = n.cross(e1);
      for (int a = 0; a < n_u; ++a) {
        for (int b = 0; b < n_v; ++b) {
          const double ua = -spec.half_u + 2.0 * spec.half_u * (a + 0.5) / n_u;
          const double vb = -spec.half_v + 2.0 * spec.half_v * (b + 0.5) / n_v;
          s.points.push_back(spec.center + ua * e1 + vb * e2);
          s.normals.push_back(n);
        }
      }
      break;
    }
  }
  s.truth.assign(s.points.size(), false);
  return s;
}

}  // namespace elastofm
