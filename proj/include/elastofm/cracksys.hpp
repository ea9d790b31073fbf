#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "elastofm/background.hpp"
#include "elastofm/crack.hpp"
#include "elastofm/farfield.hpp"
#include "elastofm/linalg.hpp"
#include "elastofm/quadrature.hpp"
#include "elastofm/wavecore.hpp"

namespace elastofm {

// ---------------------------------------------------------------------------
// Galerkin crack system for the linear-slip condition. The hypersingular
// traction operator of the double-layer potential is assembled in its
// integrated-by-parts (weakly singular) form: with z = x - y, r = |z|,
// phi_k(r) = e^{ikr}/(4 pi r), chi = phi_s - phi_p and gamma1 = chi'(r)/r,
//
//   B(phi, psi) = int int  rho w^2 [ phi_p psi_n phi_n + phi_s psi_t.phi_t ]
//                 - S_nn grad(psi_n).grad(phi_n)
//                 - mu phi_s grad(psi_t):grad(phi_t)
//                 + Q div(psi_t) div(phi_t)   dS dS,
//   S_nn = (4 mu (lambda+mu)/(lambda+2mu)) phi_p + (4 mu^2/(rho w^2)) gamma1,
//   Q    = mu phi_s + (4 mu^2/(rho w^2)) gamma1,
//
// where subscripts n/t denote the normal/tangential parts of the opening and
// gradients are surface gradients. The derivation is exact for flat cracks;
// curved conforming patches reuse the same kernels facetwise. The production
// operator is W = -B (positive definite in the static limit), and the
// linear-slip system reads (W + K) [u] = t_inc on the non-edge nodes.
// ---------------------------------------------------------------------------

struct CrackKernelCoeffs {
  cplx k_p, k_s;       // complex to admit the metaharmonic (shifted) form
  double lambda, mu;
  cplx rho_omega2;     // mu k_s^2

  static CrackKernelCoeffs from(const WaveNumbers& wn) {
    return {cplx(wn.k_p, 0), cplx(wn.k_s, 0), wn.exterior.lambda, wn.exterior.mu,
            cplx(wn.rho_omega2(), 0)};
  }
};

struct CrackKernelValues {
  cplx mass_p, mass_s;  // rho w^2 phi_p, rho w^2 phi_s
  cplx s_nn, mu_phi_s, q;
};

inline CrackKernelValues crack_kernels(const CrackKernelCoeffs& c, double r) {
  // complex-wavenumber variants of the radial toolkit
  auto phi = [&](cplx k) { return std::exp(iu * k * r) / (4.0 * pi * r); };
  cplx chi_d1;
  {
    const double kmax = std::max(std::abs(c.k_p), std::abs(c.k_s));
    if (kmax * r < 0.05) {
      cplx ps = iu * c.k_s, pp = iu * c.k_p;
      cplx d1 = 0;
      double fact = 1.0, r1 = 1.0;
      for (int m = 1; m <= 24; ++m) {
        fact *= m;
        if (m >= 2) {
          d1 += (ps - pp) / fact * double(m - 1) * r1;
          r1 *= r;
        }
        ps *= iu * c.k_s;
        pp *= iu * c.k_p;
      }
      chi_d1 = d1 / (4.0 * pi);
    } else {
      auto dphi = [&](cplx k) {
        return (iu * k * r - 1.0) * std::exp(iu * k * r) / (4.0 * pi * r * r);
      };
      chi_d1 = dphi(c.k_s) - dphi(c.k_p);
    }
  }
  const cplx gamma1 = chi_d1 / r;
  const cplx php = phi(c.k_p), phs = phi(c.k_s);
  CrackKernelValues v;
  v.mass_p = c.rho_omega2 * php;
  v.mass_s = c.rho_omega2 * phs;
  const double la = c.lambda, mu = c.mu;
  v.s_nn = (4.0 * mu * (la + mu) / (la + 2.0 * mu)) * php +
           (4.0 * mu * mu) / c.rho_omega2 * gamma1;
  v.mu_phi_s = mu * phs;
  v.q = mu * phs + (4.0 * mu * mu) / c.rho_omega2 * gamma1;
  return v;
}

/// Per-node complex opening [u] on the crack with its incidence metadata.
struct OpeningDisplacement {
  const CrackGeometry* crack = nullptr;
  CVecX values;  // 3 * n_nodes, zero at edge nodes
  Vec3 direction = Vec3::Zero();
  CVec3 polarization = CVec3::Zero();
};

class CrackSystem {
 public:
  CrackSystem(const CrackGeometry& crack, const ElasticMedium& medium, double omega,
              bool metaharmonic_shift = false)
      : crack_(&crack), wn_(wave_numbers(omega, medium)) {
    crack.validate();
    const double lam_s = 2.0 * pi / wn_.k_s;
    if (lam_s / crack.mesh.max_edge() < 6.0 && !metaharmonic_shift)
      warnings.push_back("crack mesh under-resolved: fewer than 6 nodes per shear wavelength");
    build_free_map();
    CrackKernelCoeffs coeffs = CrackKernelCoeffs::from(wn_);
    if (metaharmonic_shift) {
      coeffs.k_p = iu * cplx(wn_.k_p, 0);
      coeffs.k_s = iu * cplx(wn_.k_s, 0);
      coeffs.rho_omega2 = -cplx(wn_.rho_omega2(), 0);
    }
    assemble_form(coeffs);
    assemble_stiffness_and_mass();
    combined_ = w_mat_ + k_mat_;
    lu_ = std::make_unique<LuSolver>(combined_);
    const double cond = lu_->cond1_estimate();
    if (cond > 1e12)
      throw SolverError("crack system is numerically singular", cond, omega * 1.005);
  }

  const CrackGeometry& crack() const { return *crack_; }
  const WaveNumbers& wn() const { return wn_; }
  int n_free() const { return static_cast<int>(free_nodes_.size()); }

  /// Relative asymmetry of the assembled combined matrix.
  double symmetry_defect() const {
    return (combined_ - combined_.transpose()).norm() / combined_.norm();
  }
  /// Quadrature asymmetry of the raw bilinear form before symmetrization.
  double presym_defect() const { return presym_defect_; }

  const CMatX& form_matrix() const { return w_mat_; }
  const CMatX& stiffness_matrix() const { return k_mat_; }

  /// Consistent load vector for a traction field given in global coordinates.
  CVecX load_from_traction(const std::function<CVec3(const Vec3&, const Vec3&)>& t) const {
    CVecX f = CVecX::Zero(3 * n_free());
    const TriMesh& mesh = crack_->mesh;
    for (int e = 0; e < (int)mesh.tris.size(); ++e) {
      const auto& tr = mesh.tris[e];
      std::vector<QuadPoint> qs;
      tri_gauss(mesh.verts[tr[0]], mesh.verts[tr[1]], mesh.verts[tr[2]], 5, qs);
      for (const auto& q : qs) {
        const double b[3] = {q.b0, q.b1, q.b2};
        Vec3 nu = Vec3::Zero();
        for (int k = 0; k < 3; ++k) nu += b[k] * crack_->nu[tr[k]];
        nu.normalize();
        const CVec3 tv = t(q.x, nu);
        for (int k = 0; k < 3; ++k) {
          const int fa = free_index_[tr[k]];
          if (fa < 0) continue;
          f.segment<3>(3 * fa) += (q.w * b[k]) * tv;
        }
      }
    }
    return f;
  }

  /// Lumped load from nodal traction samples (the discrete T path).
  CVecX load_from_nodal_traction(const CVecX& t_nodes) const {
    return mass_ * t_nodes;
  }

  /// Solves (W + K) u = f for a free-dof load and scatters to all nodes.
  CVecX solve_load(const CVecX& f) const {
    CVecX uf = lu_->solve(f);
    CVecX u = CVecX::Zero(3 * crack_->n_nodes());
    for (int a = 0; a < n_free(); ++a) u.segment<3>(3 * free_nodes_[a]) = uf.segment<3>(3 * a);
    return u;
  }

  /// Plane-wave scattering solve: opening for incidence (d, q) in the
  /// homogeneous background.
  OpeningDisplacement solve_plane_wave(const Vec3& d, const CVec3& q) const {
    OpeningDisplacement op;
    op.crack = crack_;
    op.direction = d;
    op.polarization = q;
    if (q.norm() == 0.0) {
      op.values = CVecX::Zero(3 * crack_->n_nodes());
      return op;
    }
    CVecX f = load_from_traction([&](const Vec3& y, const Vec3& nu) -> CVec3 {
      return traction_columns(plane_wave_gradient(y, d, wn_), nu, wn_.exterior) * q;
    });
    op.values = solve_load(f);
    return op;
  }

  /// Discrete T: map nodal tractions to the opening they produce.
  CVecX apply_t(const CVecX& t_nodes) const { return solve_load(mass_ * t_nodes); }

  /// Quadratic form <T t, t> over the crack (duality pairing via the mass
  /// matrix); its imaginary part is positive for admissible stiffness.
  cplx t_quadratic_form(const CVecX& t_nodes) const {
    CVecX u = apply_t(t_nodes);
    CVecX mu_all = mass_all_ * u;
    return t_nodes.dot(mu_all);  // <T t, t> = int (T t) . conj(t)
  }

  std::vector<std::string> warnings;
  const std::vector<int>& free_nodes() const { return free_nodes_; }
  int free_index(int node) const { return free_index_[node]; }
  const CMatX& mass_free_by_all() const { return mass_; }

 private:
  void build_free_map() {
    free_index_.assign(crack_->n_nodes(), -1);
    for (int v = 0; v < crack_->n_nodes(); ++v) {
      if (!crack_->edge_node[v]) {
        free_index_[v] = static_cast<int>(free_nodes_.size());
        free_nodes_.push_back(v);
      }
    }
    require(!free_nodes_.empty(), "crack mesh has no interior nodes");
  }

  struct ElemData {
    Vec3 p0, p1, p2;
    Vec3 normal;
    Vec3 grad[3];  // in-plane shape gradients
    int nodes[3];
    double diam;
    std::vector<QuadPoint> gauss;
  };

  void assemble_form(const CrackKernelCoeffs& coeffs);
  void assemble_stiffness_and_mass();

  // scatter helper for pair blocks in free-dof indexing
  void scatter_block(CMatX& m, int node_a, int node_b, const CMat3& blk) {
    const int fa = free_index_[node_a], fb = free_index_[node_b];
    if (fa < 0 || fb < 0) return;
    m.block<3, 3>(3 * fa, 3 * fb) += blk;
  }

  const CrackGeometry* crack_;
  WaveNumbers wn_;
  std::vector<int> free_nodes_;
  std::vector<int> free_index_;
  CMatX w_mat_;      // -B, free x free
  CMatX k_mat_;      // Galerkin stiffness, free x free
  CMatX combined_;   // W + K
  CMatX mass_;       // Galerkin mass, free x all (load from nodal data)
  CMatX mass_all_;   // Galerkin mass, all x all (duality pairings)
  double presym_defect_ = 0.0;
  std::unique_ptr<LuSolver> lu_;
};

inline void CrackSystem::assemble_form(const CrackKernelCoeffs& coeffs) {
  const TriMesh& mesh = crack_->mesh;
  const int ne = (int)mesh.tris.size();
  std::vector<ElemData> elems(ne);
  for (int e = 0; e < ne; ++e) {
    ElemData& ed = elems[e];
    const auto& tr = mesh.tris[e];
    ed.p0 = mesh.verts[tr[0]];
    ed.p1 = mesh.verts[tr[1]];
    ed.p2 = mesh.verts[tr[2]];
    for (int k = 0; k < 3; ++k) ed.nodes[k] = tr[k];
    Vec3 raw = (ed.p1 - ed.p0).cross(ed.p2 - ed.p0);
    ed.normal = raw.normalized();
    // orient with the nodal frame
    Vec3 nav = crack_->nu[tr[0]] + crack_->nu[tr[1]] + crack_->nu[tr[2]];
    if (ed.normal.dot(nav) < 0) ed.normal = -ed.normal;
    ed.diam = std::max({(ed.p1 - ed.p0).norm(), (ed.p2 - ed.p1).norm(), (ed.p0 - ed.p2).norm()});
    // in-plane gradients of the P1 shapes: grad N_k is constant
    const double twoA = raw.norm();
    const Vec3 n = raw / twoA;
    ed.grad[0] = n.cross(ed.p2 - ed.p1) / twoA;
    ed.grad[1] = n.cross(ed.p0 - ed.p2) / twoA;
    ed.grad[2] = n.cross(ed.p1 - ed.p0) / twoA;
    // align gradient sign: N_k increases toward vertex k
    for (int k = 0; k < 3; ++k) {
      const Vec3 vk = (k == 0 ? ed.p0 : k == 1 ? ed.p1 : ed.p2);
      const Vec3 opp = (k == 0 ? 0.5 * (ed.p1 + ed.p2)
                               : k == 1 ? 0.5 * (ed.p0 + ed.p2) : 0.5 * (ed.p0 + ed.p1));
      if (ed.grad[k].dot(vk - opp) < 0) ed.grad[k] = -ed.grad[k];
    }
    tri_gauss(ed.p0, ed.p1, ed.p2, 5, ed.gauss);
  }

  const int nf = n_free();
  const int workers = std::max(1, thread_count() > 0
                                      ? thread_count()
                                      : (int)std::thread::hardware_concurrency());
  std::vector<CMatX> partials(workers, CMatX::Zero(3 * nf, 3 * nf));

  auto pair_contribution = [&](const ElemData& ex, const ElemData& ey, CMatX& acc) {
    // scalar pair sums: s_mass_p/s_mass_s per (a,b); s_snn, s_mu_phis, s_q shared
    cplx s1[3][3] = {}, s2[3][3] = {};
    cplx s3 = 0, s4 = 0, s5 = 0;
    const double c = (ex.p0 + ex.p1 + ex.p2 - ey.p0 - ey.p1 - ey.p2).norm() / 3.0;
    const bool same = (&ex == &ey);
    const bool near = !same && c < 1.5 * std::max(ex.diam, ey.diam);

    auto accumulate_point_pair = [&](const Vec3& x, double wx, const double bx[3],
                                     const Vec3& y, double wy, const double by[3]) {
      const double r = (x - y).norm();
      if (r < kMinSeparation) return;
      const CrackKernelValues kv = crack_kernels(coeffs, r);
      const double w = wx * wy;
      s3 += w * kv.s_nn;
      s4 += w * kv.mu_phi_s;
      s5 += w * kv.q;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          s1[a][b] += (w * bx[a] * by[b]) * kv.mass_p;
          s2[a][b] += (w * bx[a] * by[b]) * kv.mass_s;
        }
    };

    if (same) {
      // outer Gauss, inner Duffy split at the outer point
      for (const auto& qx : ex.gauss) {
        const double bx[3] = {qx.b0, qx.b1, qx.b2};
        const Vec3 corners[3] = {ey.p0, ey.p1, ey.p2};
        for (int sdiv = 0; sdiv < 3; ++sdiv) {
          std::vector<QuadPoint> inner;
          tri_duffy(qx.x, corners[sdiv], corners[(sdiv + 1) % 3], 4, inner);
          for (const auto& qy : inner) {
            double by[3];
            barycentric_in(ey.p0, ey.p1, ey.p2, qy.x, by[0], by[1], by[2]);
            accumulate_point_pair(qx.x, qx.w, bx, qy.x, qy.w, by);
          }
        }
      }
    } else if (near) {
      for (const auto& qx : ex.gauss) {
        const double bx[3] = {qx.b0, qx.b1, qx.b2};
        integrate_near_singular(qx.x, ey.p0, ey.p1, ey.p2, [&](const QuadPoint& qy) {
          double by[3];
          barycentric_in(ey.p0, ey.p1, ey.p2, qy.x, by[0], by[1], by[2]);
          accumulate_point_pair(qx.x, qx.w, bx, qy.x, qy.w, by);
        });
      }
    } else {
      for (const auto& qx : ex.gauss) {
        const double bx[3] = {qx.b0, qx.b1, qx.b2};
        for (const auto& qy : ey.gauss) {
          const double by[3] = {qy.b0, qy.b1, qy.b2};
          accumulate_point_pair(qx.x, qx.w, bx, qy.x, qy.w, by);
        }
      }
    }

    // assemble the 9 node-pair blocks; W = -B flips every kernel sign
    const Mat3 nxny = ex.normal * ey.normal.transpose();
    const Mat3 px = Mat3::Identity() - ex.normal * ex.normal.transpose();
    const Mat3 py = Mat3::Identity() - ey.normal * ey.normal.transpose();
    const Mat3 pxpy = px * py;
    for (int a = 0; a < 3; ++a) {
      const int na = ex.nodes[a];
      if (free_index_[na] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int nb = ey.nodes[b];
        if (free_index_[nb] < 0) continue;
        const double gg = ex.grad[a].dot(ey.grad[b]);
        const Vec3 pga = px * ex.grad[a];
        const Vec3 pgb = py * ey.grad[b];
        CMat3 blk = -s1[a][b] * nxny - s2[a][b] * pxpy;
        blk += (s3 * gg) * nxny + (s4 * gg) * pxpy;
        blk -= s5 * (pga * pgb.transpose());
        const int fa = free_index_[na], fb = free_index_[nb];
        acc.block<3, 3>(3 * fa, 3 * fb) += blk;
        if (!same) acc.block<3, 3>(3 * fb, 3 * fa) += blk.transpose();
      }
    }
  };

  parallel_for(workers, [&](std::size_t w) {
    for (int ei = (int)w; ei < ne; ei += workers) {
      for (int ej = ei; ej < ne; ++ej) pair_contribution(elems[ei], elems[ej], partials[w]);
    }
  });
  w_mat_ = CMatX::Zero(3 * nf, 3 * nf);
  for (const auto& p : partials) w_mat_ += p;
  // the exact Galerkin form is symmetric; remove residual quadrature asymmetry
  presym_defect_ = (w_mat_ - w_mat_.transpose()).norm() / w_mat_.norm();
  w_mat_ = 0.5 * (w_mat_ + w_mat_.transpose()).eval();
}

inline void CrackSystem::assemble_stiffness_and_mass() {
  const TriMesh& mesh = crack_->mesh;
  const int nf = n_free();
  const int nn = crack_->n_nodes();
  k_mat_ = CMatX::Zero(3 * nf, 3 * nf);
  mass_ = CMatX::Zero(3 * nf, 3 * nn);
  mass_all_ = CMatX::Zero(3 * nn, 3 * nn);
  std::vector<CMat3> kglob(nn);
  for (int v = 0; v < nn; ++v) kglob[v] = crack_->stiffness_global(v);
  for (int e = 0; e < (int)mesh.tris.size(); ++e) {
    const auto& tr = mesh.tris[e];
    std::vector<QuadPoint> qs;
    tri_gauss(mesh.verts[tr[0]], mesh.verts[tr[1]], mesh.verts[tr[2]], 5, qs);
    for (const auto& q : qs) {
      const double b[3] = {q.b0, q.b1, q.b2};
      CMat3 kq = CMat3::Zero();
      for (int k = 0; k < 3; ++k) kq += b[k] * kglob[tr[k]];
      for (int a = 0; a < 3; ++a) {
        for (int bb = 0; bb < 3; ++bb) {
          const double nanb = q.w * b[a] * b[bb];
          mass_all_.block<3, 3>(3 * tr[a], 3 * tr[bb]) +=
              nanb * CMat3(CMat3::Identity());
          const int fa = free_index_[tr[a]];
          if (fa < 0) continue;
          mass_.block<3, 3>(3 * fa, 3 * tr[bb]) += nanb * CMat3(CMat3::Identity());
          const int fb = free_index_[tr[bb]];
          if (fb < 0) continue;
          k_mat_.block<3, 3>(3 * fa, 3 * fb) += nanb * kq;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Radiation and far-field assembly
// ---------------------------------------------------------------------------

/// 3N x 3M radiation matrix: consistent quadrature of the far-field
/// double-layer kernel against the P1 opening.
inline CMatX crack_radiation_matrix(const CrackGeometry& crack, const WaveNumbers& wn,
                                    const DirectionGrid& grid) {
  const TriMesh& mesh = crack.mesh;
  const int nn = crack.n_nodes();
  CMatX rad = CMatX::Zero(3 * grid.size(), 3 * nn);
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vec3 xihat = grid.dirs[i];
    for (int e = 0; e < (int)mesh.tris.size(); ++e) {
      const auto& tr = mesh.tris[e];
      std::vector<QuadPoint> qs;
      tri_gauss(mesh.verts[tr[0]], mesh.verts[tr[1]], mesh.verts[tr[2]], 5, qs);
      for (const auto& q : qs) {
        const double b[3] = {q.b0, q.b1, q.b2};
        Vec3 nu = Vec3::Zero();
        for (int k = 0; k < 3; ++k) nu += b[k] * crack.nu[tr[k]];
        nu.normalize();
        const CMat3 dinf = dl_far_kernel(xihat, q.x, nu, wn);
        for (int k = 0; k < 3; ++k)
          rad.block<3, 3>(3 * i, 3 * tr[k]) += (q.w * b[k]) * dinf;
      }
    }
  });
  return rad;
}

/// Far-field column of one opening over the grid.
inline CVecX crack_far_field(const OpeningDisplacement& op, const DirectionGrid& grid,
                             const WaveNumbers& wn) {
  CMatX rad = crack_radiation_matrix(*op.crack, wn, grid);
  return rad * op.values;
}

/// Discrete Herglotz traction operator: maps a density on the grid to
/// background tractions at the crack nodes; column blocks carry the grid
/// quadrature weights.
inline CMatX herglotz_traction_matrix(const CrackGeometry& crack, const WaveNumbers& wn,
                                      const DirectionGrid& grid) {
  const int nn = crack.n_nodes();
  CMatX h = CMatX::Zero(3 * nn, 3 * grid.size());
  for (int a = 0; a < nn; ++a) {
    for (int j = 0; j < grid.size(); ++j) {
      const CMat3 t = traction_columns(
          plane_wave_gradient(crack.mesh.verts[a], grid.dirs[j], wn), crack.nu[a],
          wn.exterior);
      h.block<3, 3>(3 * a, 3 * j) = grid.weights[j] * t;
    }
  }
  return h;
}

/// Smallest-to-largest singular value ratio of the discrete Herglotz
/// traction operator. Near-zero values flag excluded frequencies (or exact
/// symmetry degeneracies, e.g. a flat crack lying in a mirror plane of the
/// direction grid), where the injectivity assumption behind the range
/// characterization fails.
inline double herglotz_smin_ratio(const CrackGeometry& crack, const WaveNumbers& wn,
                                  const DirectionGrid& grid) {
  const CMatX h = herglotz_traction_matrix(crack, wn, grid);
  VecX ev;
  CMatX evec;
  hermitian_eig(CMatX(h.adjoint() * h), ev, evec);
  const double smax = std::sqrt(std::max(0.0, ev.maxCoeff()));
  const double smin = std::sqrt(std::max(0.0, ev.minCoeff()));
  return smax > 0 ? smin / smax : 0.0;
}

/// Nodal (lumped) areas of the crack mesh.
inline VecX crack_lumped_areas(const CrackGeometry& crack) {
  VecX m = VecX::Zero(crack.n_nodes());
  for (int e = 0; e < crack.n_elements(); ++e) {
    const double a3 = crack.mesh.tri_area(e) / 3.0;
    for (int k = 0; k < 3; ++k) m[crack.mesh.tris[e][k]] += a3;
  }
  return m;
}

/// Adjoint of the Herglotz operator in the L2(Gamma0) x L2(S^2) pairing,
/// realized with lumped nodal areas; maps nodal openings to a grid density.
inline CMatX herglotz_adjoint_matrix(const CrackGeometry& crack, const WaveNumbers& wn,
                                     const DirectionGrid& grid) {
  const int nn = crack.n_nodes();
  const VecX lump = crack_lumped_areas(crack);
  CMatX hstar = CMatX::Zero(3 * grid.size(), 3 * nn);
  for (int j = 0; j < grid.size(); ++j) {
    for (int a = 0; a < nn; ++a) {
      const CMat3 t = traction_columns(
          plane_wave_gradient(crack.mesh.verts[a], grid.dirs[j], wn), crack.nu[a],
          wn.exterior);
      hstar.block<3, 3>(3 * j, 3 * a) = lump[a] * t.adjoint();
    }
  }
  return hstar;
}

// ---------------------------------------------------------------------------
// Scene-level far-field assembly
// ---------------------------------------------------------------------------

/// Measured far-field matrix for a homogeneous background: F = F_D, columns
/// assembled from one crack solve per grid direction and Cartesian
/// polarization.
inline FarFieldMatrix measured_far_matrix_homogeneous(const CrackSystem& sys,
                                                      const DirectionGrid& grid) {
  FarFieldMatrix f;
  f.grid = grid;
  f.omega = sys.wn().omega;
  f.role = FarFieldRole::F;
  f.media.push_back(sys.wn().exterior);
  const int n = grid.size();
  const int nn = sys.crack().n_nodes();
  CMatX openings(3 * nn, 3 * n);
  parallel_for(n, [&](std::size_t j) {
    for (int c = 0; c < 3; ++c) {
      CVec3 q = CVec3::Zero();
      q[c] = 1.0;
      auto op = sys.solve_plane_wave(grid.dirs[j], q);
      openings.col(3 * j + c) = op.values;
    }
  });
  CMatX rad = crack_radiation_matrix(sys.crack(), sys.wn(), grid);
  f.a = rad * openings;
  return f;
}

/// Relative defect of the discrete factorization F_D = S_b H* T H for the
/// homogeneous background (S_b = I). The left side is the physical forward
/// matrix (consistent Galerkin loads and radiation); the right side is
/// assembled from the operator definitions (weighted H, lumped-adjoint H*,
/// and T as a traction-to-opening solve).
inline double factorization_residual_homogeneous(const CrackSystem& sys,
                                                 const DirectionGrid& grid) {
  FarFieldMatrix fd = measured_far_matrix_homogeneous(sys, grid);
  const int nn = sys.crack().n_nodes();
  CMatX h = herglotz_traction_matrix(sys.crack(), sys.wn(), grid);
  CMatX hstar = herglotz_adjoint_matrix(sys.crack(), sys.wn(), grid);
  // strip the grid weights from H to compare kernel matrices entrywise
  CMatX h_nw = h;
  for (int j = 0; j < grid.size(); ++j)
    h_nw.middleCols<3>(3 * j) /= grid.weights[j];
  CMatX t_of_h(3 * nn, h.cols());
  for (int c = 0; c < h.cols(); ++c) t_of_h.col(c) = sys.apply_t(h_nw.col(c));
  CMatX rhs = hstar * t_of_h;
  return (fd.a - rhs).norm() / fd.a.norm();
}

}  // namespace elastofm
