#pragma once

#include <Eigen/Dense>
#include <memory>

#include "elastofm/common.hpp"

namespace elastofm {

/// Dense complex LU with a Hager-style 1-norm condition estimate.
class LuSolver {
 public:
  explicit LuSolver(CMatX a) : norm1_(a.cwiseAbs().colwise().sum().maxCoeff()), lu_(std::move(a)) {}

  CVecX solve(const CVecX& b) const { return lu_.solve(b); }
  CMatX solve(const CMatX& b) const { return lu_.solve(b); }
  CVecX solve_adjoint(const CVecX& b) const { return lu_.adjoint().solve(b); }

  Eigen::Index size() const { return lu_.rows(); }

  /// Estimate of cond_1(A) = ||A||_1 ||A^-1||_1.
  double cond1_estimate() const {
    const Eigen::Index n = lu_.rows();
    CVecX x = CVecX::Constant(n, cplx(1.0 / double(n), 0.0));
    double est = 0.0;
    for (int iter = 0; iter < 5; ++iter) {
      CVecX y = lu_.solve(x);
      est = y.cwiseAbs().sum();
      CVecX xi(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double a = std::abs(y[i]);
        xi[i] = (a > 0) ? y[i] / a : cplx(1.0, 0.0);
      }
      CVecX z = lu_.adjoint().solve(xi);
      Eigen::Index j;
      const double zmax = z.cwiseAbs().maxCoeff(&j);
      if (zmax <= std::real(z.dot(x)) + 1e-14) break;
      x.setZero();
      x[j] = 1.0;
    }
    return est * norm1_;
  }

 private:
  double norm1_;
  Eigen::PartialPivLU<CMatX> lu_;
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
inline void hermitian_eig(const CMatX& a, VecX& evals, CMatX& evecs) {
  Eigen::SelfAdjointEigenSolver<CMatX> es(a);
  if (es.info() != Eigen::Success) throw SolverError("hermitian eigensolver failed", 0.0, 0.0);
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
}

}  // namespace elastofm
