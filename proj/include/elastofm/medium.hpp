#pragma once

#include <cmath>
#include <string>

#include "elastofm/common.hpp"

namespace elastofm {

/// Lame parameters and density of one (dimensionless) material layer.
struct ElasticMedium {
  double lambda = 0.0;
  double mu = 0.0;
  double rho = 0.0;

  double c_s() const { return std::sqrt(mu / rho); }
  double c_p() const { return std::sqrt((lambda + 2.0 * mu) / rho); }

  void validate(const std::string& name = "medium") const {
    require(mu > 0.0, name + ".mu must be positive");
    require(lambda > 0.0, name + ".lambda must be positive");
    require(rho > 0.0, name + ".rho must be positive");
  }

  bool operator==(const ElasticMedium&) const = default;
};

/// Frequency, P/S wave numbers and the far-field normalization constants of
/// the exterior medium.
struct WaveNumbers {
  double omega = 0.0;
  double k_p = 0.0;
  double k_s = 0.0;
  double alpha_p = 0.0;  // 1/(4 pi (lambda + 2 mu))
  double alpha_s = 0.0;  // 1/(4 pi mu)
  ElasticMedium exterior;

  double rho_omega2() const { return exterior.rho * omega * omega; }
};

inline WaveNumbers wave_numbers(double omega, const ElasticMedium& exterior) {
  require(omega > 0.0, "omega must be positive");
  exterior.validate("exterior");
  WaveNumbers wn;
  wn.omega = omega;
  wn.exterior = exterior;
  wn.k_s = omega / std::sqrt(exterior.mu / exterior.rho);
  wn.k_p = omega / std::sqrt((exterior.lambda + 2.0 * exterior.mu) / exterior.rho);
  wn.alpha_p = 1.0 / (4.0 * pi * (exterior.lambda + 2.0 * exterior.mu));
  wn.alpha_s = 1.0 / (4.0 * pi * exterior.mu);
  return wn;
}

/// (lambda_a - lambda_b)(mu_a - mu_b) >= 0, the transmission monotonicity
/// condition on a shared interface.
inline bool check_monotonicity(const ElasticMedium& a, const ElasticMedium& b) {
  a.validate("a");
  b.validate("b");
  return (a.lambda - b.lambda) * (a.mu - b.mu) >= 0.0;
}

}  // namespace elastofm
