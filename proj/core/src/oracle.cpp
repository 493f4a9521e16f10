#include "bhtbp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "bhtbp/errors.hpp"

namespace bhtbp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_gaussian(const Eigen::MatrixXd& cov, const Eigen::VectorXd& z) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw InvalidSpec("oracle: singular pattern covariance");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd w = llt.matrixL().solve(z);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
  return -0.5 * (w.squaredNorm() + log_det + static_cast<double>(z.size()) * std::log(2.0 * M_PI));
}

double log_sum_exp(double max, double sum_shifted) { return max + std::log(sum_shifted); }

}  // namespace

std::vector<double> exact_support_posterior(const Eigen::MatrixXd& phi, std::span<const double> z,
                                            double q, double slab_std, double noise_std,
                                            OracleLimit limit) {
  const auto m = static_cast<std::size_t>(phi.rows());
  const auto n = static_cast<std::size_t>(phi.cols());
  if (n > limit.max_n) throw InvalidSpec("oracle: n = " + std::to_string(n) + " exceeds limit");
  if (z.size() != m) throw DimensionMismatch("oracle: z length != rows");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidSpec("oracle: q must lie in [0, 1]");
  if (!(noise_std >= 0.0) || !(slab_std > 0.0)) throw InvalidSpec("oracle: bad standard deviations");

  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(m));
  const Eigen::MatrixXd noise_cov =
      noise_std * noise_std * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  const double slab_var = slab_std * slab_std;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);

  const std::size_t patterns = std::size_t{1} << n;
  std::vector<double> log_w(patterns, kNegInf);
  for (std::size_t s = 0; s < patterns; ++s) {
    const auto size = static_cast<double>(std::popcount(s));
    const double log_prior = (size > 0 ? size * log_q : 0.0) +
                             (size < static_cast<double>(n) ? (static_cast<double>(n) - size) * log_1mq : 0.0);
    if (log_prior == kNegInf) continue;
    Eigen::MatrixXd cov = noise_cov;
    for (std::size_t i = 0; i < n; ++i) {
      if (s >> i & 1u) cov.noalias() += slab_var * phi.col(static_cast<Eigen::Index>(i)) *
                                        phi.col(static_cast<Eigen::Index>(i)).transpose();
    }
    log_w[s] = log_prior + log_gaussian(cov, zv);
  }

  // two passes (max, then shifted sums) so the result does not depend on
  // the order patterns were visited in
  double max = kNegInf;
  for (double v : log_w) max = std::max(max, v);
  if (max == kNegInf) throw InvalidSpec("oracle: no pattern has positive weight");
  double total = 0.0;
  std::vector<double> active(n, 0.0);
  for (std::size_t s = 0; s < patterns; ++s) {
    if (log_w[s] == kNegInf) continue;
    const double w = std::exp(log_w[s] - max);
    total += w;
    for (std::size_t i = 0; i < n; ++i) {
      if (s >> i & 1u) active[i] += w;
    }
  }
  const double log_total = log_sum_exp(max, total);
  std::vector<double> probs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = active[i] > 0.0 ? std::exp(log_sum_exp(max, active[i]) - log_total) : 0.0;
  }
  return probs;
}

std::vector<double> exact_support_posterior(const SparseBernoulliMatrix& phi,
                                            std::span<const double> z, double q,
                                            double slab_std, double noise_std,
                                            OracleLimit limit) {
  if (phi.cols() > limit.max_n) throw InvalidSpec("oracle: n exceeds limit");
  return exact_support_posterior(phi.to_dense(), z, q, slab_std, noise_std, limit);
}

StateVector exact_map_support(const Eigen::MatrixXd& phi, std::span<const double> z, double q,
                              double slab_std, double noise_std, OracleLimit limit) {
  const auto probs = exact_support_posterior(phi, z, q, slab_std, noise_std, limit);
  StateVector s(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) s.bits[i] = probs[i] > 0.5 ? 1 : 0;
  return s;
}

StateVector exact_map_support(const SparseBernoulliMatrix& phi, std::span<const double> z,
                              double q, double slab_std, double noise_std, OracleLimit limit) {
  if (phi.cols() > limit.max_n) throw InvalidSpec("oracle: n exceeds limit");
  return exact_map_support(phi.to_dense(), z, q, slab_std, noise_std, limit);
}

SparseBernoulliMatrix random_tree_matrix(std::size_t n, std::size_t m, Rng& rng) {
  if (n < 1 || m < 1) throw InvalidSpec("random_tree_matrix: need n >= 1 and m >= 1");
  std::uniform_int_distribution<int> coin(0, 1);
  auto sign = [&] { return static_cast<std::int8_t>(coin(rng) ? 1 : -1); };
  std::vector<std::vector<SignedIndex>> cols(n);

  // grow a random tree from variable 0; a node can join once a node of the
  // other kind is already present
  std::vector<std::uint32_t> vars_in{0};
  std::vector<std::uint32_t> factors_in;
  std::vector<std::uint32_t> pending_vars(n - 1), pending_factors(m);
  std::iota(pending_vars.begin(), pending_vars.end(), 1u);
  std::iota(pending_factors.begin(), pending_factors.end(), 0u);
  auto pick = [&](std::size_t size) {
    return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
  };
  while (!pending_vars.empty() || !pending_factors.empty()) {
    const bool can_add_var = !factors_in.empty() && !pending_vars.empty();
    const std::size_t choices = pending_factors.size() + (can_add_var ? pending_vars.size() : 0);
    const std::size_t c = pick(choices);
    if (c < pending_factors.size()) {
      const std::uint32_t f = pending_factors[c];
      pending_factors.erase(pending_factors.begin() + static_cast<std::ptrdiff_t>(c));
      cols[vars_in[pick(vars_in.size())]].push_back({f, sign()});
      factors_in.push_back(f);
    } else {
      const std::size_t v_pos = c - pending_factors.size();
      const std::uint32_t v = pending_vars[v_pos];
      pending_vars.erase(pending_vars.begin() + static_cast<std::ptrdiff_t>(v_pos));
      cols[v].push_back({factors_in[pick(factors_in.size())], sign()});
      vars_in.push_back(v);
    }
  }
  return SparseBernoulliMatrix::from_columns(m, std::move(cols));
}

bool is_cycle_free(const SparseBernoulliMatrix& matrix) {
  // union-find over variables [0, n) and factors [n, n + m)
  std::vector<std::size_t> parent(matrix.cols() + matrix.rows());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < matrix.cols(); ++i) {
    for (const auto& e : matrix.column(i)) {
      const std::size_t a = find(i);
      const std::size_t b = find(matrix.cols() + e.index);
      if (a == b) return false;
      parent[a] = b;
    }
  }
  return true;
}

}  // namespace bhtbp
