#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "elastofm/common.hpp"
#include "elastofm/farfield.hpp"
#include "elastofm/linalg.hpp"
#include "elastofm/mesh.hpp"
#include "elastofm/quadrature.hpp"
#include "elastofm/wavecore.hpp"

namespace elastofm {

// ---------------------------------------------------------------------------
// Transmission solver: direct boundary integral formulation collocated at
// mesh vertices, with nu outward of the inclusion and interior/exterior
// fundamental solutions G_i / G_e. Unknowns are the scattered Cauchy data
// (w, s); the right-hand side uses the kernel-contrast form
//     rhs = -(K_i - K_e) u_inc + (V_i - V_e) t_inc,
// which vanishes identically at zero material contrast. The strongly
// singular CPV diagonal of the double layer is fixed by the static
// rigid-body identity CPV int_Gamma N_stat dS = -I/2.
// ---------------------------------------------------------------------------

/// Scattered Cauchy data of three solves (unit Cartesian polarizations as
/// columns) plus the incident data they correspond to.
struct TransmissionSolution {
  CMatX w, s;        // scattered Cauchy data, 3M x 3
  CMatX uinc, tinc;  // incident Cauchy data on the interface
  bool interior_source = false;
  bool point_source = false;
  Vec3 source = Vec3::Zero();     // point-source location
  Vec3 direction = Vec3::Zero();  // plane-wave direction
};

class TransmissionSolver {
 public:
  TransmissionSolver(TriMesh mesh, std::vector<ElasticMedium> interiors,
                     ElasticMedium exterior, double omega, double cond_limit = 1e10)
      : mesh_(std::move(mesh)), wn_e_(wave_numbers(omega, exterior)) {
    require(static_cast<int>(interiors.size()) == mesh_.n_components(),
            "one interior medium per mesh component required");
    for (const auto& m : interiors) {
      require(check_monotonicity(m, exterior),
              "transmission media violate the monotonicity condition");
      wn_i_.push_back(wave_numbers(omega, m));
    }
    const double h = mesh_.max_edge();
    double ks_max = wn_e_.k_s;
    for (const auto& wn : wn_i_) ks_max = std::max(ks_max, wn.k_s);
    if (2.0 * pi / ks_max / h < 6.0)
      warnings.push_back(
          "transmission mesh under-resolved: fewer than 6 nodes per shear wavelength");
    if (wn_e_.k_s * mesh_diameter() > 8.0)
      warnings.push_back("k_s * diameter exceeds the validated desk-scale range (~8)");
    assemble();
    const double cond = lu_->cond1_estimate();
    if (cond > cond_limit) {
      throw SolverError(
          "transmission system ill-conditioned (possible irregular frequency); "
          "retry with omega shifted by 0.5%",
          cond, omega * 1.005);
    }
  }

  TransmissionSolver(TriMesh mesh, ElasticMedium interior, ElasticMedium exterior,
                     double omega, double cond_limit = 1e10)
      : TransmissionSolver(std::move(mesh), std::vector<ElasticMedium>{interior}, exterior,
                           omega, cond_limit) {}

  const TriMesh& mesh() const { return mesh_; }
  const WaveNumbers& wn_exterior() const { return wn_e_; }
  const WaveNumbers& wn_interior(int component = 0) const { return wn_i_[component]; }
  int n_nodes() const { return static_cast<int>(mesh_.verts.size()); }

  TransmissionSolution solve_plane_wave(const Vec3& d) const {
    TransmissionSolution res;
    res.interior_source = false;
    res.direction = d;
    const int m3 = 3 * n_nodes();
    res.uinc.resize(m3, 3);
    res.tinc.resize(m3, 3);
    for (int v = 0; v < n_nodes(); ++v) {
      res.uinc.middleRows<3>(3 * v) = plane_wave_tensor(mesh_.verts[v], d, wn_e_);
      res.tinc.middleRows<3>(3 * v) =
          traction_columns(plane_wave_gradient(mesh_.verts[v], d, wn_e_),
                           mesh_.vert_normals[v], wn_e_.exterior);
    }
    solve_contrast(res, /*incident_row_interior=*/true);
    return res;
  }

  TransmissionSolution solve_point_source(const Vec3& x) const {
    require(mesh_.n_components() == 1,
            "point-source solves support a single-component interface");
    TransmissionSolution res;
    res.interior_source = point_inside(x);
    res.point_source = true;
    res.source = x;
    const WaveNumbers& wn = res.interior_source ? wn_i_[0] : wn_e_;
    const int m3 = 3 * n_nodes();
    res.uinc.resize(m3, 3);
    res.tinc.resize(m3, 3);
    for (int v = 0; v < n_nodes(); ++v) {
      res.uinc.middleRows<3>(3 * v) = kupradze(mesh_.verts[v], x, wn);
      res.tinc.middleRows<3>(3 * v) = traction_columns(
          kupradze_gradient(mesh_.verts[v], x, wn), mesh_.vert_normals[v], wn.exterior);
    }
    solve_contrast(res, /*incident_row_interior=*/!res.interior_source);
    return res;
  }

  /// Exterior Cauchy data radiating to the far field (scattered for plane
  /// incidence, total for an interior source).
  void exterior_data(const TransmissionSolution& r, CMatX& u, CMatX& t) const {
    if (r.interior_source) {
      u = r.w + r.uinc;
      t = r.s + r.tinc;
    } else {
      u = r.w;
      t = r.s;
    }
  }

  /// Far-field pattern (P + S parts, alpha-normalized) of the radiating
  /// exterior field at observation direction xihat. For an exterior point
  /// source the incident Kupradze far field is included.
  CMat3 far_field(const TransmissionSolution& r, const Vec3& xihat) const {
    CMatX u, t;
    exterior_data(r, u, t);
    CMat3 out = CMat3::Zero();
    for (int e = 0; e < static_cast<int>(mesh_.tris.size()); ++e) {
      const auto& tr = mesh_.tris[e];
      std::vector<QuadPoint> qs;
      tri_gauss(mesh_.verts[tr[0]], mesh_.verts[tr[1]], mesh_.verts[tr[2]], 5, qs);
      for (const auto& q : qs) {
        const double b[3] = {q.b0, q.b1, q.b2};
        Vec3 nu = Vec3::Zero();
        CMat3 uq = CMat3::Zero(), tq = CMat3::Zero();
        for (int k = 0; k < 3; ++k) {
          nu += b[k] * mesh_.vert_normals[tr[k]];
          uq += b[k] * u.middleRows<3>(3 * tr[k]);
          tq += b[k] * t.middleRows<3>(3 * tr[k]);
        }
        nu.normalize();
        Vec3 x = q.x;
        double ws = 1.0;
        mesh_.curve_point(x, nu, ws, mesh_.verts[tr[1]] - mesh_.verts[tr[0]],
                          mesh_.verts[tr[2]] - mesh_.verts[tr[0]]);
        out += (q.w * ws) * (dl_far_kernel(xihat, x, nu, wn_e_) * uq -
                             kupradze_far_field(xihat, x, wn_e_).total() * tq);
      }
    }
    if (r.point_source && !r.interior_source)
      out += kupradze_far_field(xihat, r.source, wn_e_).total();
    return out;
  }

  /// Far-field evaluation matrices over a grid: pattern = FFD * u - FFG * t.
  void far_field_matrices(const DirectionGrid& grid, CMatX& ffd, CMatX& ffg) const {
    const int m3 = 3 * n_nodes();
    ffd = CMatX::Zero(3 * grid.size(), m3);
    ffg = CMatX::Zero(3 * grid.size(), m3);
    parallel_for(grid.size(), [&](std::size_t i) {
      const Vec3 xihat = grid.dirs[i];
      for (int e = 0; e < static_cast<int>(mesh_.tris.size()); ++e) {
        const auto& tr = mesh_.tris[e];
        std::vector<QuadPoint> qs;
        tri_gauss(mesh_.verts[tr[0]], mesh_.verts[tr[1]], mesh_.verts[tr[2]], 5, qs);
        for (const auto& q : qs) {
          const double b[3] = {q.b0, q.b1, q.b2};
          Vec3 nu = Vec3::Zero();
          for (int k = 0; k < 3; ++k) nu += b[k] * mesh_.vert_normals[tr[k]];
          nu.normalize();
          Vec3 x = q.x;
          double ws = 1.0;
          mesh_.curve_point(x, nu, ws, mesh_.verts[tr[1]] - mesh_.verts[tr[0]],
                            mesh_.verts[tr[2]] - mesh_.verts[tr[0]]);
          const CMat3 dinf = dl_far_kernel(xihat, x, nu, wn_e_);
          const CMat3 ginf = kupradze_far_field(xihat, x, wn_e_).total();
          for (int k = 0; k < 3; ++k) {
            ffd.block<3, 3>(3 * i, 3 * tr[k]) += (q.w * ws * b[k]) * dinf;
            ffg.block<3, 3>(3 * i, 3 * tr[k]) -= (q.w * ws * b[k]) * ginf;
          }
        }
      }
    });
  }

  /// Total background tensor at x: incident plus scattered (exterior) or the
  /// interior representation (interior x).
  CMat3 total_field(const TransmissionSolution& r, const Vec3& x) const {
    const bool inside = point_inside(x);
    CMat3 out;
    if (!inside) {
      CMatX u, t;
      exterior_data(r, u, t);
      out = represent_exterior(u, t, x);
      if (!r.interior_source) {
        out += r.point_source ? kupradze(x, r.source, wn_e_)
                              : plane_wave_tensor(x, r.direction, wn_e_);
      }
    } else {
      CMatX u, t;
      if (r.interior_source) {
        u = r.w;
        t = r.s;
      } else {
        u = r.w + r.uinc;
        t = r.s + r.tinc;
      }
      out = represent_interior(u, t, x, component_of(x));
      if (r.interior_source) out += kupradze(x, r.source, wn_i_[0]);
    }
    return out;
  }

  /// Component containing x, or -1 when x lies in the exterior.
  int component_of(const Vec3& x) const {
    std::vector<double> omega_sum(mesh_.n_components(), 0.0);
    for (int t = 0; t < static_cast<int>(mesh_.tris.size()); ++t) {
      const auto& tr = mesh_.tris[t];
      const Vec3 a = mesh_.verts[tr[0]] - x, b = mesh_.verts[tr[1]] - x,
                 c = mesh_.verts[tr[2]] - x;
      const double la = a.norm(), lb = b.norm(), lc = c.norm();
      const double num = a.dot(b.cross(c));
      const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
      omega_sum[mesh_.component_of_tri(t)] += 2.0 * std::atan2(num, den);
    }
    for (int c = 0; c < mesh_.n_components(); ++c)
      if (omega_sum[c] > 2.0 * pi) return c;
    return -1;
  }
  bool point_inside(const Vec3& x) const { return component_of(x) >= 0; }

  double mesh_diameter() const {
    Vec3 lo = mesh_.verts[0], hi = mesh_.verts[0];
    for (const auto& v : mesh_.verts) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
  }

  double condition_estimate() const { return lu_->cond1_estimate(); }

  std::vector<std::string> warnings;

 private:
  void assemble();

  void solve_contrast(TransmissionSolution& res, bool incident_row_interior) const {
    const int m3 = 3 * n_nodes();
    CMatX rhs = CMatX::Zero(2 * m3, 3);
    const CMatX contrast = -(kd_ * res.uinc) + vd_ * res.tinc;
    if (incident_row_interior)
      rhs.topRows(m3) = contrast;
    else
      rhs.bottomRows(m3) = contrast;
    CMatX sol = lu_->solve(rhs);
    res.w = sol.topRows(m3);
    res.s = sol.bottomRows(m3);
  }

  /// D_e[u] - V_e[t] at exterior x.
  CMat3 represent_exterior(const CMatX& u, const CMatX& t, const Vec3& x) const {
    return represent(u, t, x, wn_e_, /*interior=*/false, -1);
  }
  /// V_i[t] - D_i[u] at interior x, over the enclosing component only.
  CMat3 represent_interior(const CMatX& u, const CMatX& t, const Vec3& x, int component) const {
    return represent(u, t, x, wn_i_[component], /*interior=*/true, component);
  }

  CMat3 represent(const CMatX& u, const CMatX& t, const Vec3& x, const WaveNumbers& wn,
                  bool interior, int component) const {
    CMat3 out = CMat3::Zero();
    for (int e = 0; e < static_cast<int>(mesh_.tris.size()); ++e) {
      if (interior && mesh_.component_of_tri(e) != component) continue;
      const auto& tr = mesh_.tris[e];
      const Vec3 p0 = mesh_.verts[tr[0]], p1 = mesh_.verts[tr[1]], p2 = mesh_.verts[tr[2]];
      integrate_near_singular(x, p0, p1, p2, [&](const QuadPoint& q) {
        double b[3];
        barycentric_in(p0, p1, p2, q.x, b[0], b[1], b[2]);
        Vec3 nu = Vec3::Zero();
        CMat3 uq = CMat3::Zero(), tq = CMat3::Zero();
        for (int k = 0; k < 3; ++k) {
          nu += b[k] * mesh_.vert_normals[tr[k]];
          uq += b[k] * u.middleRows<3>(3 * tr[k]);
          tq += b[k] * t.middleRows<3>(3 * tr[k]);
        }
        nu.normalize();
        Vec3 y = q.x;
        double ws = 1.0;
        mesh_.curve_point(y, nu, ws, p1 - p0, p2 - p0, mesh_.component_of_tri(e));
        const CMat3 g = kupradze(x, y, wn);
        const CMat3 n = dl_kernel(x, y, nu, wn);
        out += (interior ? CMat3((q.w * ws) * (g * tq - n * uq))
                         : CMat3((q.w * ws) * (n * uq - g * tq)));
      });
    }
    return out;
  }

  TriMesh mesh_;
  WaveNumbers wn_e_;
  std::vector<WaveNumbers> wn_i_;
  CMatX kd_, vd_;  // kernel contrasts K_i - K_e and V_i - V_e for right-hand sides
  std::unique_ptr<LuSolver> lu_;

 public:
  // assembled collocation blocks, retained when debug_blocks() is enabled
  struct DebugBlocks {
    CMatX ve, vi, ke, ki;
  };
  static bool& debug_blocks() {
    static bool on = false;
    return on;
  }
  std::unique_ptr<DebugBlocks> blocks;
};

inline void TransmissionSolver::assemble() {
  const int m = n_nodes();
  const int m3 = 3 * m;
  CMatX ve = CMatX::Zero(m3, m3), vi = CMatX::Zero(m3, m3);
  CMatX ke = CMatX::Zero(m3, m3), ki = CMatX::Zero(m3, m3);
  // component-restricted kernel contrasts for the right-hand sides
  CMatX kd = CMatX::Zero(m3, m3), vd = CMatX::Zero(m3, m3);

  parallel_for(m, [&](std::size_t row) {
    const Vec3 x0 = mesh_.verts[row];
    const int row_comp = mesh_.component_of_vert(static_cast<int>(row));
    const WaveNumbers& wn_row = wn_i_[row_comp];
    CMat3 r_acc_e = CMat3::Zero(), r_acc_i = CMat3::Zero();
    for (int e = 0; e < static_cast<int>(mesh_.tris.size()); ++e) {
      const auto& tr = mesh_.tris[e];
      // interior equations and the contrast live on the row's closed
      // component; the exterior trace integrates over every component
      const bool same_comp = mesh_.component_of_tri(e) == row_comp;
      const Vec3 p0 = mesh_.verts[tr[0]], p1 = mesh_.verts[tr[1]], p2 = mesh_.verts[tr[2]];
      const int local_of_row =
          (tr[0] == (int)row) ? 0 : (tr[1] == (int)row) ? 1 : (tr[2] == (int)row) ? 2 : -1;
      integrate_near_singular(x0, p0, p1, p2, [&](const QuadPoint& q) {
        double b[3];
        barycentric_in(p0, p1, p2, q.x, b[0], b[1], b[2]);
        Vec3 nu = Vec3::Zero();
        for (int k = 0; k < 3; ++k) nu += b[k] * mesh_.vert_normals[tr[k]];
        nu.normalize();
        Vec3 y = q.x;
        double wsc = 1.0;
        mesh_.curve_point(y, nu, wsc, p1 - p0, p2 - p0, mesh_.component_of_tri(e));
        if ((y - x0).norm() < kMinSeparation) return;
        const double w = q.w * wsc;
        const CMat3 g_e = kupradze(x0, y, wn_e_);
        const CMat3 n_e = dl_kernel(x0, y, nu, wn_e_);
        for (int k = 0; k < 3; ++k)
          ve.block<3, 3>(3 * row, 3 * tr[k]) += (w * b[k]) * g_e;
        if (!same_comp) {
          // x0 lies outside this closed component: plain quadrature
          for (int k = 0; k < 3; ++k)
            ke.block<3, 3>(3 * row, 3 * tr[k]) += (w * b[k]) * n_e;
          return;
        }
        const CMat3 g_i = kupradze(x0, y, wn_row);
        const CMat3 n_i = dl_kernel(x0, y, nu, wn_row);
        r_acc_e += w * (n_e - dl_kernel_static(x0, y, nu, wn_e_.exterior));
        r_acc_i += w * (n_i - dl_kernel_static(x0, y, nu, wn_row.exterior));
        // CPV assembly: N*(shape - delta_{node,row}) plus, on elements not
        // touching the row node, the -N constant piece; the rigid-body
        // constant enters the diagonal after the element loop.
        for (int k = 0; k < 3; ++k) {
          const double shape = b[k];
          vi.block<3, 3>(3 * row, 3 * tr[k]) += (w * shape) * g_i;
          vd.block<3, 3>(3 * row, 3 * tr[k]) += (w * shape) * (g_i - g_e);
          const double corr = (k == local_of_row) ? 1.0 : 0.0;
          ke.block<3, 3>(3 * row, 3 * tr[k]) += (w * (shape - corr)) * n_e;
          ki.block<3, 3>(3 * row, 3 * tr[k]) += (w * (shape - corr)) * n_i;
          kd.block<3, 3>(3 * row, 3 * tr[k]) += (w * (shape - corr)) * (n_i - n_e);
        }
        if (local_of_row < 0) {
          ke.block<3, 3>(3 * row, 3 * row) -= w * n_e;
          ki.block<3, 3>(3 * row, 3 * row) -= w * n_i;
          kd.block<3, 3>(3 * row, 3 * row) -= w * (n_i - n_e);
        }
      });
    }
    ke.block<3, 3>(3 * row, 3 * row) += -0.5 * CMat3::Identity() + r_acc_e;
    ki.block<3, 3>(3 * row, 3 * row) += -0.5 * CMat3::Identity() + r_acc_i;
    kd.block<3, 3>(3 * row, 3 * row) += r_acc_i - r_acc_e;  // the -I/2 terms cancel
  });

  CMatX system(2 * m3, 2 * m3);
  system.topLeftCorner(m3, m3) = ki;
  system.topRightCorner(m3, m3) = -vi;
  system.bottomLeftCorner(m3, m3) = -ke;
  system.bottomRightCorner(m3, m3) = ve;
  // both 1/2-jump terms multiply the displacement unknown w
  for (int i = 0; i < m3; ++i) {
    system(i, i) += 0.5;
    system(m3 + i, i) += 0.5;
  }
  kd_ = kd;
  vd_ = vd;
  if (debug_blocks()) {
    blocks = std::make_unique<DebugBlocks>();
    blocks->ve = ve;
    blocks->vi = vi;
    blocks->ke = ke;
    blocks->ki = ki;
  }
  lu_ = std::make_unique<LuSolver>(std::move(system));
}

// ---------------------------------------------------------------------------
// Background model variants
// ---------------------------------------------------------------------------

struct HomogeneousBackground {
  ElasticMedium exterior;
};

struct PenetrableInclusionBackground {
  TriMesh mesh;  // may be a union of disjoint closed interfaces
  std::vector<ElasticMedium> interiors;
  ElasticMedium exterior;

  PenetrableInclusionBackground() = default;
  PenetrableInclusionBackground(TriMesh m, ElasticMedium inter, ElasticMedium ext)
      : mesh(std::move(m)), interiors{inter}, exterior(ext) {}
  PenetrableInclusionBackground(TriMesh m, std::vector<ElasticMedium> inter, ElasticMedium ext)
      : mesh(std::move(m)), interiors(std::move(inter)), exterior(ext) {}
};

/// Exact-node lookup archive of precomputed background data; interpolation is
/// deliberately not offered.
struct TabulatedBackground {
  DirectionGrid grid;
  double omega = 0.0;
  CMatX far_matrix;  // F_b entries
  std::map<std::pair<std::array<long, 3>, std::array<long, 3>>, CMat3> w_samples;
  ElasticMedium exterior;

  static std::array<long, 3> key(const Vec3& x) {
    return {static_cast<long>(std::llround(x[0] * 1e9)),
            static_cast<long>(std::llround(x[1] * 1e9)),
            static_cast<long>(std::llround(x[2] * 1e9))};
  }

  void add_sample(const Vec3& x, const Vec3& d, const CMat3& w) {
    w_samples[{key(x), key(d)}] = w;
  }
};

using BackgroundModel =
    std::variant<HomogeneousBackground, PenetrableInclusionBackground, TabulatedBackground>;

/// Lazily built solver plus per-direction solution cache over one model.
class Background {
 public:
  Background(BackgroundModel model, double omega) : model_(std::move(model)), omega_(omega) {
    if (auto* h = std::get_if<HomogeneousBackground>(&model_)) {
      wn_ = wave_numbers(omega, h->exterior);
    } else if (auto* p = std::get_if<PenetrableInclusionBackground>(&model_)) {
      wn_ = wave_numbers(omega, p->exterior);
    } else {
      auto& t = std::get<TabulatedBackground>(model_);
      require(t.omega == omega, "tabulated background frequency mismatch");
      wn_ = wave_numbers(omega, t.exterior);
    }
  }

  const WaveNumbers& wn() const { return wn_; }
  double omega() const { return omega_; }
  bool homogeneous() const { return std::holds_alternative<HomogeneousBackground>(model_); }
  bool tabulated() const { return std::holds_alternative<TabulatedBackground>(model_); }
  const BackgroundModel& model() const { return model_; }

  TransmissionSolver& solver() const {
    auto* p = std::get_if<PenetrableInclusionBackground>(&model_);
    require(p != nullptr, "background has no transmission solver");
    if (!solver_) {
      solver_ =
          std::make_shared<TransmissionSolver>(p->mesh, p->interiors, p->exterior, omega_);
    }
    return *solver_;
  }

  const TransmissionSolution& plane_solution(const Vec3& d) const {
    auto key = TabulatedBackground::key(d);
    auto it = plane_cache_.find(key);
    if (it != plane_cache_.end()) return it->second;
    auto res = solver().solve_plane_wave(d);
    return plane_cache_.emplace(key, std::move(res)).first->second;
  }

  /// W_b(x, d): the background response tensor.
  CMat3 response(const Vec3& x, const Vec3& d) const {
    if (std::holds_alternative<HomogeneousBackground>(model_))
      return plane_wave_tensor(x, d, wn_);
    if (auto* t = std::get_if<TabulatedBackground>(&model_)) {
      auto it = t->w_samples.find({TabulatedBackground::key(x), TabulatedBackground::key(d)});
      if (it == t->w_samples.end())
        throw ValidationError(
            "tabulated background queried off its sample set (exact-node lookup only)");
      return it->second;
    }
    return solver().total_field(plane_solution(d), x);
  }

  /// Columnwise traction of W_b(., d) at an interface node (inclusion) or at
  /// any point (homogeneous). The inclusion path reads the Cauchy data, so y
  /// must coincide with a mesh vertex.
  CMat3 traction_tensor(const Vec3& y, const Vec3& nu, const Vec3& d) const {
    if (std::holds_alternative<HomogeneousBackground>(model_))
      return traction_columns(plane_wave_gradient(y, d, wn_), nu, wn_.exterior);
    if (std::holds_alternative<TabulatedBackground>(model_))
      throw ValidationError("tabulated background carries no traction samples");
    const auto& r = plane_solution(d);
    const TriMesh& mesh = solver().mesh();
    int best = -1;
    double bestd = 1e300;
    for (int v = 0; v < (int)mesh.verts.size(); ++v) {
      double dd = (mesh.verts[v] - y).norm();
      if (dd < bestd) {
        bestd = dd;
        best = v;
      }
    }
    require(bestd <= 1e-9 * (1.0 + mesh.max_edge()),
            "background traction requires an interface mesh node");
    (void)nu;  // the host normal is the mesh normal at that node
    return r.s.middleRows<3>(3 * best) + r.tinc.middleRows<3>(3 * best);
  }

 private:
  BackgroundModel model_;
  double omega_;
  WaveNumbers wn_;
  mutable std::shared_ptr<TransmissionSolver> solver_;
  mutable std::map<std::array<long, 3>, TransmissionSolution> plane_cache_;
};

struct BackgroundFarField {
  FarFieldMatrix f_b;
};

/// Assembles the 3N x 3N background far-field matrix with blocks
/// W_b^inf(xihat_i, d_j). Homogeneous backgrounds scatter nothing.
inline BackgroundFarField background_far_matrix(const Background& bg,
                                                const DirectionGrid& grid) {
  BackgroundFarField out;
  out.f_b.grid = grid;
  out.f_b.omega = bg.omega();
  out.f_b.role = FarFieldRole::Fb;
  out.f_b.media.push_back(bg.wn().exterior);
  if (bg.homogeneous()) {
    out.f_b.set_zero();
    return out;
  }
  if (bg.tabulated()) {
    const auto& t = std::get<TabulatedBackground>(bg.model());
    require(t.grid.n_theta == grid.n_theta && t.grid.n_phi == grid.n_phi,
            "tabulated background grid mismatch");
    out.f_b.a = t.far_matrix;
    return out;
  }
  auto& solver = bg.solver();
  const auto* inc = std::get_if<PenetrableInclusionBackground>(&bg.model());
  for (const auto& med : inc->interiors) out.f_b.media.push_back(med);
  const int m3 = 3 * solver.n_nodes();
  const int n = grid.size();
  CMatX u(m3, 3 * n), t(m3, 3 * n);
  for (int j = 0; j < n; ++j) {
    const auto& r = bg.plane_solution(grid.dirs[j]);
    u.middleCols<3>(3 * j) = r.w;
    t.middleCols<3>(3 * j) = r.s;
  }
  CMatX ffd, ffg;
  solver.far_field_matrices(grid, ffd, ffg);
  out.f_b.a = ffd * u + ffg * t;
  return out;
}

/// Relative defect of the mixed reciprocity identity relating the far field
/// of a point source to the plane-wave background response. With rows
/// indexing the observed component and columns the source polarization, the
/// identity reads G_b^inf(xihat, x) = W_b(x, -xihat)^T; the transpose is
/// invisible in the homogeneous case where both tensors are symmetric.
inline double mixed_reciprocity_residual(const Background& bg, const Vec3& x,
                                         const Vec3& xihat) {
  require(std::abs(xihat.norm() - 1.0) <= 1e-9, "xihat must be a unit vector");
  if (bg.homogeneous()) {
    const CMat3 lhs = kupradze_far_field(xihat, x, bg.wn()).total();
    const CMat3 rhs = plane_wave_tensor(x, Vec3(-xihat), bg.wn());
    return (lhs - rhs).norm() / rhs.norm();
  }
  auto& solver = bg.solver();
  const auto src = solver.solve_point_source(x);
  const CMat3 lhs = solver.far_field(src, xihat);
  const CMat3 rhs = solver.total_field(bg.plane_solution(Vec3(-xihat)), x).transpose();
  return (lhs - rhs).norm() / rhs.norm();
}

}  // namespace elastofm
