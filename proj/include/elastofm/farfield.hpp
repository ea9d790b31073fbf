#pragma once

#include <string>
#include <vector>

#include "elastofm/common.hpp"
#include "elastofm/grid.hpp"
#include "elastofm/medium.hpp"

namespace elastofm {

enum class FarFieldRole { F, Fb, FD, Sb, Ftilde, Fsharp };

inline std::string role_name(FarFieldRole r) {
  switch (r) {
    case FarFieldRole::F: return "F";
    case FarFieldRole::Fb: return "F_b";
    case FarFieldRole::FD: return "F_D";
    case FarFieldRole::Sb: return "S_b";
    case FarFieldRole::Ftilde: return "F_tilde";
    case FarFieldRole::Fsharp: return "F_sharp";
  }
  return "?";
}

inline FarFieldRole role_from_name(const std::string& s) {
  if (s == "F") return FarFieldRole::F;
  if (s == "F_b") return FarFieldRole::Fb;
  if (s == "F_D") return FarFieldRole::FD;
  if (s == "S_b") return FarFieldRole::Sb;
  if (s == "F_tilde") return FarFieldRole::Ftilde;
  if (s == "F_sharp") return FarFieldRole::Fsharp;
  throw ValidationError("unknown far-field role tag: " + s);
}

/// 3N x 3N block matrix over a direction grid; block (i,j) maps the
/// polarization of a plane wave incident along d_j to the far-field pattern
/// observed at xihat_i. Entries are raw kernel samples; quadrature weighting
/// happens in the inversion module's operator frame.
struct FarFieldMatrix {
  DirectionGrid grid;
  double omega = 0.0;
  FarFieldRole role = FarFieldRole::F;
  std::vector<ElasticMedium> media;
  CMatX a;

  int n() const { return grid.size(); }
  int dim() const { return 3 * grid.size(); }

  void set_zero() { a = CMatX::Zero(dim(), dim()); }

  Eigen::Block<CMatX, 3, 3> block(int i, int j) { return a.block<3, 3>(3 * i, 3 * j); }
  Eigen::Block<const CMatX, 3, 3> block(int i, int j) const {
    return a.block<3, 3>(3 * i, 3 * j);
  }

  bool compatible_with(const FarFieldMatrix& o) const {
    return grid.n_theta == o.grid.n_theta && grid.n_phi == o.grid.n_phi &&
           omega == o.omega;
  }
};

/// Worst-case relative block-reciprocity defect
/// max_ij |W(xi_i, d_j) - W(-d_j, -xi_i)^T| / scale; grids must be closed
/// under the antipodal map.
inline double block_reciprocity_defect(const FarFieldMatrix& f) {
  require(f.grid.antipodal_closed(), "grid is not closed under the antipodal map");
  const int n = f.n();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const CMat3 a = f.block(i, j);
      const CMat3 b = f.block(f.grid.antipode(j), f.grid.antipode(i)).transpose();
      num += (a - b).squaredNorm();
      den += a.squaredNorm();
    }
  }
  return std::sqrt(num / (den + 1e-300));
}

}  // namespace elastofm
