#pragma once

#include <cmath>
#include <vector>

#include "elastofm/common.hpp"

namespace elastofm {

/// N_theta x N_phi product grid on the unit sphere. Polar nodes sit at
/// half-steps so no direction lands on a pole and every triad is defined.
/// Theta weights are exact panel integrals of sin(theta), so the weights sum
/// to 4*pi to machine precision while matching sin(theta)*dtheta*dphi to
/// O(dtheta^2).
struct DirectionGrid {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<Vec3> dirs;        // size N = n_theta*n_phi, row-major over (theta, phi)
  std::vector<Vec3> theta_hat;   // polar tangent
  std::vector<Vec3> phi_hat;     // azimuthal tangent
  std::vector<double> weights;   // quadrature weights on S^2

  int size() const { return n_theta * n_phi; }

  /// Index of -d(idx) on the same grid; requires n_phi even.
  int antipode(int idx) const {
    const int j = idx / n_phi, k = idx % n_phi;
    const int jj = n_theta - 1 - j;
    const int kk = (k + n_phi / 2) % n_phi;
    return jj * n_phi + kk;
  }
  bool antipodal_closed() const { return n_phi % 2 == 0; }
};

inline DirectionGrid direction_grid(int n_theta, int n_phi) {
  require(n_theta >= 2, "n_theta must be at least 2");
  require(n_phi >= 2, "n_phi must be at least 2");
  DirectionGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  const double dth = pi / n_theta;
  const double dph = 2.0 * pi / n_phi;
  g.dirs.reserve(g.size());
  g.theta_hat.reserve(g.size());
  g.phi_hat.reserve(g.size());
  g.weights.reserve(g.size());
  for (int j = 0; j < n_theta; ++j) {
    const double th = (j + 0.5) * dth;
    const double st = std::sin(th), ct = std::cos(th);
    // integral of sin over the panel [th - dth/2, th + dth/2]
    const double wth = 2.0 * st * std::sin(0.5 * dth);
    for (int k = 0; k < n_phi; ++k) {
      const double ph = k * dph;
      const double sp = std::sin(ph), cp = std::cos(ph);
      g.dirs.emplace_back(st * cp, st * sp, ct);
      g.theta_hat.emplace_back(ct * cp, ct * sp, -st);
      g.phi_hat.emplace_back(-sp, cp, 0.0);
      g.weights.push_back(wth * dph);
    }
  }
  return g;
}

}  // namespace elastofm
