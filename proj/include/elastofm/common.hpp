#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace elastofm {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;
using CMatX = Eigen::MatrixXcd;
using CVecX = Eigen::VectorXcd;
using VecX = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx iu{0.0, 1.0};

/// Bad argument to a library operation; `what()` names the offending field.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Kernel evaluation at (near-)coincident source and field points.
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Linear solve on an ill-conditioned or resonant system.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, double cond_estimate, double suggested_omega)
      : std::runtime_error(msg), cond(cond_estimate), suggested_omega(suggested_omega) {}
  double cond = 0.0;
  double suggested_omega = 0.0;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

/// Global worker count for parallel loops. 0 = hardware concurrency.
inline int& thread_count() {
  static int n = 0;
  return n;
}

/// Runs fn(i) for i in [0,n). Work items must write disjoint outputs; the
/// schedule is an atomic counter, so results do not depend on thread count.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  int workers = thread_count() > 0 ? thread_count()
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace elastofm
