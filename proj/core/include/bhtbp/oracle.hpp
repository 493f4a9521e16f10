#pragma once

// Exact support posteriors for small problems by enumerating all 2^n
// support patterns. With an untruncated Gaussian slab the signal integrates
// out in closed form: z | S ~ N(0, slab_std^2 Phi_S Phi_S^T + noise_std^2 I).

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bhtbp/model.hpp"

namespace bhtbp {

struct OracleLimit {
  std::size_t max_n = 16;
};

/// Pr{s_i = 1 | z} for every i. Throws InvalidSpec when n > limit.max_n or
/// some pattern's covariance is singular (noise_std = 0 with rank-deficient
/// Phi_S).
std::vector<double> exact_support_posterior(const Eigen::MatrixXd& phi, std::span<const double> z,
                                            double q, double slab_std, double noise_std,
                                            OracleLimit limit = {});
std::vector<double> exact_support_posterior(const SparseBernoulliMatrix& phi,
                                            std::span<const double> z, double q,
                                            double slab_std, double noise_std,
                                            OracleLimit limit = {});

/// Coordinate-wise MAP: bit i set iff Pr{s_i = 1 | z} > 1/2.
StateVector exact_map_support(const Eigen::MatrixXd& phi, std::span<const double> z, double q,
                              double slab_std, double noise_std, OracleLimit limit = {});
StateVector exact_map_support(const SparseBernoulliMatrix& phi, std::span<const double> z,
                              double q, double slab_std, double noise_std,
                              OracleLimit limit = {});

/// Random connected cycle-free factor graph with n variables and m factors
/// (every variable and factor has degree >= 1), random edge signs. Needs
/// 1 <= m and n >= 1.
SparseBernoulliMatrix random_tree_matrix(std::size_t n, std::size_t m, Rng& rng);

/// True when the bipartite graph of the matrix has no cycle.
bool is_cycle_free(const SparseBernoulliMatrix& matrix);

}  // namespace bhtbp
