#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "elastofm/common.hpp"

namespace elastofm {

/// Optional exact geometry carried by meshes of curved analytic surfaces, so
/// quadrature can evaluate kernels on the true surface instead of the flat
/// facets.
struct SurfaceMap {
  enum class Kind { None, Ellipsoid } kind = Kind::None;
  Vec3 center = Vec3::Zero();
  Vec3 semi = Vec3::Ones();  // sphere: all semi-axes equal the radius
};

struct TriMesh {
  std::vector<Vec3> verts;
  std::vector<Vec3> vert_normals;  // outward unit normals (host-surface normals)
  std::vector<std::array<int, 3>> tris;
  SurfaceMap smap;
  // connected-component labels for unions of disjoint closed surfaces
  std::vector<int> vert_component;
  std::vector<int> tri_component;
  std::vector<SurfaceMap> component_smaps;

  int n_components() const {
    return component_smaps.empty() ? 1 : static_cast<int>(component_smaps.size());
  }
  int component_of_vert(int v) const {
    return vert_component.empty() ? 0 : vert_component[v];
  }
  int component_of_tri(int t) const { return tri_component.empty() ? 0 : tri_component[t]; }

  /// Projects a flat-facet quadrature point onto the exact surface, returning
  /// the exact normal and the area-element correction factor. The two edge
  /// vectors span the facet plane. For mesh unions pass the triangle's
  /// component.
  void curve_point(Vec3& x, Vec3& nu, double& wscale, const Vec3& e1, const Vec3& e2,
                   int component = 0) const {
    const SurfaceMap& smap =
        component_smaps.empty() ? this->smap : component_smaps[component];
    if (smap.kind == SurfaceMap::Kind::None) return;
    const Vec3 inv(1.0 / smap.semi[0], 1.0 / smap.semi[1], 1.0 / smap.semi[2]);
    Vec3 y = (x - smap.center).cwiseProduct(inv);
    const double yl = y.norm();
    const Vec3 yh = y / yl;
    x = smap.center + yh.cwiseProduct(smap.semi);
    nu = yh.cwiseProduct(inv).normalized();
    // d x_s = S (I - yh yh^T)/|y| S^{-1} d x_f
    auto push = [&](const Vec3& e) {
      Vec3 v = e.cwiseProduct(inv);
      v = (v - yh.dot(v) * yh) / yl;
      return Vec3(v.cwiseProduct(smap.semi));
    };
    const Vec3 t1 = push(e1), t2 = push(e2);
    wscale = t1.cross(t2).norm() / e1.cross(e2).norm();
  }

  Vec3 tri_centroid(int t) const {
    const auto& e = tris[t];
    return (verts[e[0]] + verts[e[1]] + verts[e[2]]) / 3.0;
  }
  Vec3 tri_normal_raw(int t) const {
    const auto& e = tris[t];
    return (verts[e[1]] - verts[e[0]]).cross(verts[e[2]] - verts[e[0]]);
  }
  double tri_area(int t) const { return 0.5 * tri_normal_raw(t).norm(); }
  double area() const {
    double a = 0;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) a += tri_area(t);
    return a;
  }
  double max_edge() const {
    double h = 0;
    for (const auto& e : tris)
      for (int k = 0; k < 3; ++k)
        h = std::max(h, (verts[e[k]] - verts[e[(k + 1) % 3]]).norm());
    return h;
  }
};

namespace detail {

// Geodesic icosphere of frequency f: every icosahedron face is split into f^2
// triangles on a barycentric lattice, lattice points are welded exactly via
// corner/edge bookkeeping, then projected to the unit sphere.
inline TriMesh icosphere(int f) {
  require(f >= 1, "icosphere frequency must be >= 1");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> base = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : base) v.normalize();
  const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                            {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                            {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                            {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  TriMesh m;
  std::map<int, int> corner_id;
  std::map<std::tuple<int, int, int>, int> edge_id;  // (min gid, max gid, step from min)
  auto corner = [&](int c) {
    auto it = corner_id.find(c);
    if (it != corner_id.end()) return it->second;
    int id = static_cast<int>(m.verts.size());
    m.verts.push_back(base[c]);
    corner_id[c] = id;
    return id;
  };
  auto edge_point = [&](int a, int b, int step) {
    // point at fraction step/f from corner a to corner b
    int lo = std::min(a, b), hi = std::max(a, b);
    int s = (a < b) ? step : f - step;
    auto key = std::make_tuple(lo, hi, s);
    auto it = edge_id.find(key);
    if (it != edge_id.end()) return it->second;
    int id = static_cast<int>(m.verts.size());
    Vec3 p = base[lo] * (1.0 - double(s) / f) + base[hi] * (double(s) / f);
    m.verts.push_back(p.normalized());
    edge_id[key] = id;
    return id;
  };
  for (const auto& fc : faces) {
    const int A = fc[0], B = fc[1], C = fc[2];
    // lattice index (i, j): point = A + i*(B-A)/f + j*(C-A)/f, i + j <= f
    std::vector<std::vector<int>> gid(f + 1);
    for (int i = 0; i <= f; ++i) gid[i].assign(f + 1 - i, -1);
    for (int i = 0; i <= f; ++i) {
      for (int j = 0; j <= f - i; ++j) {
        int k = f - i - j;
        int id;
        if (i == f)
          id = corner(B);
        else if (j == f)
          id = corner(C);
        else if (k == f)
          id = corner(A);
        else if (k == 0)
          id = edge_point(B, C, j);  // from B to C
        else if (j == 0)
          id = edge_point(A, B, i);
        else if (i == 0)
          id = edge_point(A, C, j);
        else {
          id = static_cast<int>(m.verts.size());
          Vec3 p = base[A] * (double(k) / f) + base[B] * (double(i) / f) +
                   base[C] * (double(j) / f);
          m.verts.push_back(p.normalized());
        }
        gid[i][j] = id;
      }
    }
    for (int i = 0; i < f; ++i) {
      for (int j = 0; j < f - i; ++j) {
        m.tris.push_back({gid[i][j], gid[i + 1][j], gid[i][j + 1]});
        if (j < f - i - 1)
          m.tris.push_back({gid[i + 1][j], gid[i + 1][j + 1], gid[i][j + 1]});
      }
    }
  }
  m.vert_normals = m.verts;  // unit sphere
  return m;
}

}  // namespace detail

/// Triangulated sphere; vertex normals are exact.
inline TriMesh sphere_mesh(const Vec3& center, double radius, int frequency) {
  require(radius > 0.0, "sphere radius must be positive");
  TriMesh m = detail::icosphere(frequency);
  for (std::size_t i = 0; i < m.verts.size(); ++i) {
    m.vert_normals[i] = m.verts[i];
    m.verts[i] = center + radius * m.verts[i];
  }
  m.smap.kind = SurfaceMap::Kind::Ellipsoid;
  m.smap.center = center;
  m.smap.semi = Vec3::Constant(radius);
  return m;
}

/// Triangulated ellipsoid (x/a)^2+(y/b)^2+(z/c)^2 = 1; exact analytic normals.
inline TriMesh ellipsoid_mesh(const Vec3& center, const Vec3& semi, int frequency) {
  require(semi.minCoeff() > 0.0, "ellipsoid semi-axes must be positive");
  TriMesh m = detail::icosphere(frequency);
  for (std::size_t i = 0; i < m.verts.size(); ++i) {
    const Vec3 p = m.verts[i];
    m.verts[i] = center + Vec3(semi[0] * p[0], semi[1] * p[1], semi[2] * p[2]);
    Vec3 n(p[0] / semi[0], p[1] / semi[1], p[2] / semi[2]);
    m.vert_normals[i] = n.normalized();
  }
  m.smap.kind = SurfaceMap::Kind::Ellipsoid;
  m.smap.center = center;
  m.smap.semi = semi;
  return m;
}

/// Triangulated cube of a given side, n x n quads per face. Vertex normals on
/// edges and corners are averaged face normals.
inline TriMesh cube_mesh(const Vec3& center, double side, int n) {
  require(side > 0.0, "cube side must be positive");
  require(n >= 1, "cube facets per side must be >= 1");
  TriMesh m;
  std::map<std::array<int, 3>, int> lattice;  // integer lattice on [0,n]^3 surface
  auto vid = [&](int i, int j, int k) {
    std::array<int, 3> key{i, j, k};
    auto it = lattice.find(key);
    if (it != lattice.end()) return it->second;
    int id = static_cast<int>(m.verts.size());
    m.verts.push_back(center + side * (Vec3(i, j, k) / n - Vec3(0.5, 0.5, 0.5)));
    return lattice[key] = id;
  };
  auto add_face = [&](auto corner_fn, const Vec3& normal) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        int v00, v10, v01, v11;
        {
          auto c = corner_fn(a, b);
          v00 = vid(c[0], c[1], c[2]);
        }
        {
          auto c = corner_fn(a + 1, b);
          v10 = vid(c[0], c[1], c[2]);
        }
        {
          auto c = corner_fn(a, b + 1);
          v01 = vid(c[0], c[1], c[2]);
        }
        {
          auto c = corner_fn(a + 1, b + 1);
          v11 = vid(c[0], c[1], c[2]);
        }
        // keep outward orientation
        if (normal.sum() > 0) {
          m.tris.push_back({v00, v10, v11});
          m.tris.push_back({v00, v11, v01});
        } else {
          m.tris.push_back({v00, v11, v10});
          m.tris.push_back({v00, v01, v11});
        }
      }
    }
  };
  add_face([n](int a, int b) { return std::array<int, 3>{n, a, b}; }, Vec3(1, 0, 0));
  add_face([](int a, int b) { return std::array<int, 3>{0, a, b}; }, Vec3(-1, 0, 0));
  add_face([n](int a, int b) { return std::array<int, 3>{a, n, b}; }, Vec3(0, 1, 0));
  add_face([](int a, int b) { return std::array<int, 3>{a, 0, b}; }, Vec3(0, -1, 0));
  add_face([n](int a, int b) { return std::array<int, 3>{a, b, n}; }, Vec3(0, 0, 1));
  add_face([](int a, int b) { return std::array<int, 3>{a, b, 0}; }, Vec3(0, 0, -1));
  // averaged vertex normals from incident triangles
  m.vert_normals.assign(m.verts.size(), Vec3::Zero());
  for (std::size_t t = 0; t < m.tris.size(); ++t) {
    Vec3 nr = m.tri_normal_raw(static_cast<int>(t));
    for (int k = 0; k < 3; ++k) m.vert_normals[m.tris[t][k]] += nr;
  }
  for (auto& nv : m.vert_normals) nv.normalize();
  // fix orientation outward (cube is convex around center)
  for (auto& tr : m.tris) {
    Vec3 c = (m.verts[tr[0]] + m.verts[tr[1]] + m.verts[tr[2]]) / 3.0 - center;
    Vec3 nr = (m.verts[tr[1]] - m.verts[tr[0]]).cross(m.verts[tr[2]] - m.verts[tr[0]]);
    if (nr.dot(c) < 0) std::swap(tr[1], tr[2]);
  }
  return m;
}

/// Disjoint union of closed meshes with component bookkeeping.
inline TriMesh merge_meshes(const std::vector<TriMesh>& parts) {
  require(!parts.empty(), "merge_meshes: no parts");
  TriMesh m;
  for (int c = 0; c < static_cast<int>(parts.size()); ++c) {
    const TriMesh& p = parts[c];
    const int base = static_cast<int>(m.verts.size());
    m.verts.insert(m.verts.end(), p.verts.begin(), p.verts.end());
    m.vert_normals.insert(m.vert_normals.end(), p.vert_normals.begin(), p.vert_normals.end());
    for (const auto& t : p.tris) m.tris.push_back({t[0] + base, t[1] + base, t[2] + base});
    m.vert_component.insert(m.vert_component.end(), p.verts.size(), c);
    m.tri_component.insert(m.tri_component.end(), p.tris.size(), c);
    m.component_smaps.push_back(p.smap);
  }
  return m;
}

/// Boundary vertex flags (vertices on edges owned by exactly one triangle).
inline std::vector<bool> boundary_vertices(const TriMesh& m) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : m.tris) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  std::vector<bool> on_bdry(m.verts.size(), false);
  for (const auto& [e, c] : edge_count) {
    if (c == 1) {
      on_bdry[e.first] = true;
      on_bdry[e.second] = true;
    }
  }
  return on_bdry;
}

}  // namespace elastofm
