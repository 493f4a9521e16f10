#pragma once

// Reference recoverers: orthogonal matching pursuit and Lasso by cyclic
// coordinate descent. Supports are read off the estimates with the
// K-largest-magnitude rule.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bhtbp/model.hpp"

namespace bhtbp {

struct OmpResult {
  std::vector<double> estimate;
  StateVector support;
  std::vector<std::size_t> selection_order;
  bool rank_deficient = false;  ///< some active-set solve needed the pseudo-inverse
};

/// k greedy steps: pick the unselected column with the largest
/// |<a_j, residual>| (lower index on ties), refit least squares on the
/// active set, update the residual. Throws InvalidSpec if k > min(m, n).
OmpResult omp(const Eigen::MatrixXd& A, std::span<const double> z, std::size_t k);
inline OmpResult omp(const DenseMatrix& A, std::span<const double> z, std::size_t k) {
  return omp(A.entries, z, k);
}

struct LassoConfig {
  /// Unset means the universal threshold noise_std * sqrt(2 ln n).
  std::optional<double> lambda;
  std::size_t max_iters = 1000;
  double tol = 1e-7;
  /// Keep the objective value after every sweep (diagnostics / tests).
  bool record_objective = false;

  void validate() const;
};

struct LassoResult {
  std::vector<double> estimate;
  double lambda = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

double default_lasso_lambda(double noise_std, std::size_t n);
double soft_threshold(double v, double t);

/// Minimizes (1/2)||z - A x||^2 + lambda ||x||_1 by cyclic coordinate descent,
/// stopping when the largest coordinate change in a sweep drops below tol.
LassoResult lasso(const Eigen::MatrixXd& A, std::span<const double> z, const LassoConfig& config,
                  double noise_std = 0.0);
inline LassoResult lasso(const DenseMatrix& A, std::span<const double> z,
                         const LassoConfig& config, double noise_std = 0.0) {
  return lasso(A.entries, z, config, noise_std);
}

/// Indices of the k largest |estimate_i|; ties go to the lower index.
StateVector k_largest_support(std::span<const double> estimate, std::size_t k);

}  // namespace bhtbp
