#pragma once

// Belief propagation over discretized densities on the factor graph of a
// sparse {0,+1,-1} measurement matrix.
//
// Variable -> factor messages ("a") are spike-and-slab densities on the
// x-grid; factor -> variable messages ("b") are likelihoods over the same
// grid. A factor message is obtained by convolving the other incoming
// a-messages (reflected where the edge sign is -1) with the noise density,
// then reading the resulting z-domain density at z_j - sign * x.
//
// Schedule is flooding: every b from the current a's, then every a from
// those b's.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bhtbp/density.hpp"
#include "bhtbp/model.hpp"

namespace bhtbp {

struct BpConfig {
  std::size_t max_iters = 10;
  double damping = 0.0;
  double convergence_tol = 1e-6;
  /// x-grid: grid_points bins over [-R, R] with R = grid_half_range_sigmas * slab_std.
  std::size_t grid_points = 513;
  double grid_half_range_sigmas = 4.0;
  /// Noise density support, in noise standard deviations.
  double noise_half_width_sigmas = 8.0;

  void validate() const;
  Grid x_grid(double slab_std) const;
};

struct FactorGraph {
  struct Edge {
    std::uint32_t var;
    std::uint32_t factor;
    std::int8_t sign;
  };

  std::vector<Edge> edges;
  std::vector<std::vector<std::uint32_t>> var_edges;     ///< edge ids per variable
  std::vector<std::vector<std::uint32_t>> factor_edges;  ///< edge ids per factor
  std::vector<double> z;
  double noise_std = 0.0;

  std::size_t num_vars() const { return var_edges.size(); }
  std::size_t num_factors() const { return factor_edges.size(); }
};

FactorGraph build_graph(const SparseBernoulliMatrix& matrix, const Measurement& meas);

/// a[e]: variable -> factor along edge e; b[e]: factor -> variable.
struct MessageStore {
  std::vector<SpikedDensity> a;
  std::vector<ContinuousDensity> b;
};

/// Every a = prior, every b uniform on the prior's grid.
MessageStore init_messages(const FactorGraph& graph, const SpikedDensity& prior);

/// Noise density on the z-grid: a Gaussian over +-noise_half_width_sigmas
/// standard deviations, or a one-bin unit mass when noise_std is 0.
ContinuousDensity noise_density(double noise_std, double spacing, double half_width_sigmas);

/// b-message along one edge, computed from the density operations directly
/// (reflect, flatten, convolve, read). Reference path; run() uses a
/// leave-one-out FFT product that yields the same messages for all edges
/// of a factor at once. `degenerate` is incremented when every read hit the
/// floor and a uniform message was substituted.
ContinuousDensity factor_update(const FactorGraph& graph, const MessageStore& store,
                                std::uint32_t edge, const BpConfig& config,
                                std::size_t* degenerate = nullptr);

/// a-message along one edge: prior times every other incoming b, blended
/// with the stored a when damping > 0.
SpikedDensity variable_update(const FactorGraph& graph, const MessageStore& store,
                              std::uint32_t edge, const SpikedDensity& prior, double damping,
                              std::size_t* degenerate = nullptr);

/// Prior times all incoming b-messages of variable i, normalized.
SpikedDensity posterior(const FactorGraph& graph, const MessageStore& store, std::uint32_t var,
                        const SpikedDensity& prior, std::size_t* degenerate = nullptr);

struct BpDiagnostics {
  std::size_t iterations = 0;
  double max_residual = 0.0;  ///< max edge total-variation change in the last iteration
  std::size_t degenerate_count = 0;
  double max_normalization_error = 0.0;  ///< max |total - 1| over every message produced
  bool converged = false;
};

struct BpResult {
  std::vector<SpikedDensity> posteriors;
  BpDiagnostics diagnostics;
};

/// Spike-and-slab prior with q = k/n on the configured x-grid.
SpikedDensity make_prior(double q, double slab_std, const BpConfig& config);

BpResult run(const FactorGraph& graph, const SpikedDensity& prior, const BpConfig& config);
BpResult run(const SparseBernoulliMatrix& matrix, const Measurement& meas,
             const SpikedDensity& prior, const BpConfig& config);

}  // namespace bhtbp
