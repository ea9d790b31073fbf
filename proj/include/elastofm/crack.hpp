#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "elastofm/common.hpp"
#include "elastofm/mesh.hpp"

namespace elastofm {

/// Meshed open crack surface with nodal frames, edge flags and an interface
/// stiffness field stored in the local (nu, tau1, tau2) basis.
struct CrackGeometry {
  TriMesh mesh;
  std::vector<Vec3> nu, tau1, tau2;  // per-node orthonormal frames
  std::vector<bool> edge_node;       // on the relative boundary of Gamma0
  std::vector<bool> edge_element;    // element touches the boundary (sqrt-weight flag)
  std::vector<CMat3> stiffness_local;  // K per node, rows/cols in (nu, tau1, tau2)

  int n_nodes() const { return static_cast<int>(mesh.verts.size()); }
  int n_elements() const { return static_cast<int>(mesh.tris.size()); }

  /// K rotated to global coordinates at a node.
  CMat3 stiffness_global(int node) const {
    Mat3 r;
    r.col(0) = nu[node];
    r.col(1) = tau1[node];
    r.col(2) = tau2[node];
    return r * stiffness_local[node] * r.transpose();
  }

  void set_uniform_stiffness(const CMat3& k_local) {
    stiffness_local.assign(mesh.verts.size(), k_local);
  }

  void validate() const {
    for (std::size_t i = 0; i < nu.size(); ++i) {
      Mat3 r;
      r.col(0) = nu[i];
      r.col(1) = tau1[i];
      r.col(2) = tau2[i];
      require((r.transpose() * r - Mat3::Identity()).norm() < 1e-10,
              "crack node frame must be orthonormal");
      require((stiffness_local[i] - stiffness_local[i].transpose()).norm() <=
                  1e-12 * (1.0 + stiffness_local[i].norm()),
              "stiffness K must be symmetric");
    }
  }
};

namespace detail {

inline void stable_tangents(const Vec3& n, Vec3& t1, Vec3& t2) {
  Vec3 a = (std::abs(n[0]) < 0.9) ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  t1 = (a - a.dot(n) * n).normalized();
  t2 = n.cross(t1);
}

}  // namespace detail

/// Flat penny-shaped crack of a given radius. The mesh is a structured disc
/// with m = 6*refinement rings; ring radii follow r = a sin(pi/2 * s), which
/// clusters nodes toward the edge where the opening behaves like
/// sqrt(distance-to-edge). Default stiffness is the identity in the local
/// frame.
inline CrackGeometry penny_crack(const Vec3& center, double radius, const Vec3& normal,
                                 int refinement) {
  require(radius > 0.0, "penny radius must be positive");
  require(normal.norm() > 1e-12, "penny normal must be nonzero");
  require(refinement >= 1, "refinement must be >= 1");
  const Vec3 n = normal.normalized();
  Vec3 t1, t2;
  detail::stable_tangents(n, t1, t2);

  const int m = 6 * refinement;
  CrackGeometry ck;
  auto ring_radius = [&](int j) { return radius * std::sin(0.5 * pi * double(j) / m); };
  // ring j has 6j nodes (j >= 1); node 0 is the center
  std::vector<int> ring_start(m + 1, 0);
  ck.mesh.verts.push_back(center);
  for (int j = 1; j <= m; ++j) {
    ring_start[j] = static_cast<int>(ck.mesh.verts.size());
    const int nj = 6 * j;
    const double rj = ring_radius(j);
    for (int l = 0; l < nj; ++l) {
      const double ang = 2.0 * pi * l / nj;
      ck.mesh.verts.push_back(center + rj * (std::cos(ang) * t1 + std::sin(ang) * t2));
    }
  }
  auto ring_node = [&](int j, int l) {
    if (j == 0) return 0;
    return ring_start[j] + ((l % (6 * j)) + 6 * j) % (6 * j);
  };
  // triangulate between ring j and j+1 sector by sector
  for (int j = 0; j < m; ++j) {
    const int nj = std::max(6 * j, 1), njp = 6 * (j + 1);
    if (j == 0) {
      for (int l = 0; l < 6; ++l)
        ck.mesh.tris.push_back({0, ring_node(1, l), ring_node(1, l + 1)});
      continue;
    }
    // walk the two rings keeping the strip triangulated; each sector of ring j
    // has j nodes against j+1 nodes of ring j+1
    for (int s = 0; s < 6; ++s) {
      for (int q = 0; q < j; ++q) {
        int a = ring_node(j, s * j + q);
        int a1 = ring_node(j, s * j + q + 1);
        int b = ring_node(j + 1, s * (j + 1) + q);
        int b1 = ring_node(j + 1, s * (j + 1) + q + 1);
        ck.mesh.tris.push_back({a, b, b1});
        ck.mesh.tris.push_back({a, b1, a1});
      }
      // closing triangle of the sector
      int a = ring_node(j, s * j + j);
      int b = ring_node(j + 1, s * (j + 1) + j);
      int b1 = ring_node(j + 1, s * (j + 1) + j + 1);
      ck.mesh.tris.push_back({a, b, b1});
    }
    (void)nj;
    (void)njp;
  }
  // orient all triangles with the prescribed normal
  for (auto& tr : ck.mesh.tris) {
    Vec3 nr = (ck.mesh.verts[tr[1]] - ck.mesh.verts[tr[0]])
                  .cross(ck.mesh.verts[tr[2]] - ck.mesh.verts[tr[0]]);
    if (nr.dot(n) < 0) std::swap(tr[1], tr[2]);
  }
  const int nn = ck.n_nodes();
  ck.mesh.vert_normals.assign(nn, n);
  ck.nu.assign(nn, n);
  ck.tau1.assign(nn, t1);
  ck.tau2.assign(nn, t2);
  ck.edge_node = boundary_vertices(ck.mesh);
  ck.edge_element.assign(ck.n_elements(), false);
  for (int t = 0; t < ck.n_elements(); ++t)
    for (int k = 0; k < 3; ++k)
      if (ck.edge_node[ck.mesh.tris[t][k]]) ck.edge_element[t] = true;
  ck.set_uniform_stiffness(CMat3::Identity());
  return ck;
}

/// Crack conforming to a host surface mesh: keeps the triangles whose
/// centroid satisfies the predicate. The selection must be a nonempty,
/// connected, proper subset (an open surface with relative boundary).
inline CrackGeometry surface_patch(const TriMesh& host,
                                   const std::function<bool(const Vec3&)>& predicate,
                                   std::vector<int>* host_vertex_out = nullptr) {
  std::vector<int> keep;
  for (int t = 0; t < static_cast<int>(host.tris.size()); ++t)
    if (predicate(host.tri_centroid(t))) keep.push_back(t);
  require(!keep.empty(), "surface_patch: empty selection");
  require(keep.size() < host.tris.size(),
          "surface_patch: selection covers the whole closed surface; Gamma0 must be open");
  // connectivity over shared edges
  std::map<std::pair<int, int>, std::vector<int>> edge_tris;
  for (std::size_t ki = 0; ki < keep.size(); ++ki) {
    const auto& tr = host.tris[keep[ki]];
    for (int k = 0; k < 3; ++k) {
      int a = tr[k], b = tr[(k + 1) % 3];
      edge_tris[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(ki));
    }
  }
  std::vector<std::vector<int>> adj(keep.size());
  for (const auto& [e, ts] : edge_tris)
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      adj[ts[i]].push_back(ts[i + 1]);
      adj[ts[i + 1]].push_back(ts[i]);
    }
  std::vector<bool> seen(keep.size(), false);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = true;
  std::size_t cnt = 1;
  while (!bfs.empty()) {
    int c = bfs.front();
    bfs.pop();
    for (int nb : adj[c])
      if (!seen[nb]) {
        seen[nb] = true;
        ++cnt;
        bfs.push(nb);
      }
  }
  require(cnt == keep.size(), "surface_patch: selection is not connected");

  CrackGeometry ck;
  std::vector<int> remap(host.verts.size(), -1);
  std::vector<int> host_vertex;
  for (int t : keep) {
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      int v = host.tris[t][k];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(ck.mesh.verts.size());
        ck.mesh.verts.push_back(host.verts[v]);
        ck.mesh.vert_normals.push_back(host.vert_normals[v]);
        host_vertex.push_back(v);
      }
      tri[k] = remap[v];
    }
    ck.mesh.tris.push_back(tri);
  }
  ck.mesh.smap = host.smap;
  if (host_vertex_out) *host_vertex_out = host_vertex;
  const int nn = ck.n_nodes();
  ck.nu = ck.mesh.vert_normals;
  ck.tau1.resize(nn);
  ck.tau2.resize(nn);
  for (int i = 0; i < nn; ++i) detail::stable_tangents(ck.nu[i], ck.tau1[i], ck.tau2[i]);
  ck.edge_node = boundary_vertices(ck.mesh);
  ck.edge_element.assign(ck.n_elements(), false);
  for (int t = 0; t < ck.n_elements(); ++t)
    for (int k = 0; k < 3; ++k)
      if (ck.edge_node[ck.mesh.tris[t][k]]) ck.edge_element[t] = true;
  ck.set_uniform_stiffness(CMat3::Identity());
  return ck;
}

}  // namespace elastofm
