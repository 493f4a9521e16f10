#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "bhtbp/errors.hpp"
#include "bhtbp/oracle.hpp"
#include "oracles.hpp"

namespace bhtbp {
namespace {

TEST(Oracle, ZeroSparsityRateExcludesSupport) {
  Rng rng(1);
  const auto phi = gen_sparse_matrix(6, 4, 2, rng);
  const auto p = exact_support_posterior(phi, std::vector<double>{1.0, -2.0, 3.0, 0.5}, 0.0, 10.0, 1.0);
  for (double v : p) EXPECT_EQ(v, 0.0);
}

TEST(Oracle, ZeroObservationFavoursInactive) {
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    const auto phi = gen_sparse_matrix(10, 6, 3, rng);
    const auto p = exact_support_posterior(phi, std::vector<double>(6, 0.0), 0.2, 10.0, 1.0);
    for (double v : p) EXPECT_LT(v, 0.2);
    EXPECT_EQ(exact_map_support(phi, std::vector<double>(6, 0.0), 0.2, 10.0, 1.0).popcount(), 0u);
  }
}

TEST(Oracle, DecoupledMatchesScalarClosedForm) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(2, 2);
  phi(1, 1) = -1.0;
  for (double z0 : {0.0, 1.3, -4.0, 25.0}) {
    const std::vector<double> z{z0, 0.7 - z0};
    const auto p = exact_support_posterior(phi, z, 0.3, 3.0, 1.2);
    EXPECT_NEAR(p[0], oracle::scalar_active_probability(z[0], 0.3, 3.0, 1.2), 1e-12);
    EXPECT_NEAR(p[1], oracle::scalar_active_probability(-z[1], 0.3, 3.0, 1.2), 1e-12);
  }
}

TEST(Oracle, LargerDecoupledInstanceFactorizes) {
  std::vector<std::vector<SignedIndex>> cols(8);
  for (std::uint32_t i = 0; i < 8; ++i) cols[i].push_back({7 - i, static_cast<std::int8_t>(i % 2 ? -1 : 1)});
  const auto phi = SparseBernoulliMatrix::from_columns(8, cols);
  Rng rng(3);
  std::normal_distribution<double> nd(0.0, 5.0);
  std::vector<double> z(8);
  for (double& v : z) v = nd(rng);
  const auto p = exact_support_posterior(phi, z, 0.25, 4.0, 0.5);
  for (std::uint32_t i = 0; i < 8; ++i) {
    const double zi = z[7 - i] * (i % 2 ? -1.0 : 1.0);
    EXPECT_NEAR(p[i], oracle::scalar_active_probability(zi, 0.25, 4.0, 0.5), 1e-12);
  }
}

TEST(Oracle, MapExamples) {
  Rng rng(4);
  const auto phi = gen_sparse_matrix(8, 8, 2, rng);
  const auto z = phi.apply(std::vector<double>(8, 10.0));
  EXPECT_EQ(exact_map_support(phi, z, 0.99, 10.0, 0.1).popcount(), 8u);
  EXPECT_EQ(exact_map_support(phi, std::vector<double>(8, 0.0), 0.05, 10.0, 1.0).popcount(), 0u);
}

TEST(Oracle, InvariantToColumnOrder) {
  Rng rng(5);
  const auto phi = gen_sparse_matrix(9, 6, 3, rng);
  const auto x = gen_signal({9, 3, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(phi, x, Snr::decibels(20.0), rng);
  const auto p = exact_support_posterior(phi, meas.z, 0.3, 10.0, meas.noise_std);

  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Eigen::MatrixXd dense = phi.to_dense();
  Eigen::MatrixXd permuted(dense.rows(), dense.cols());
  for (std::size_t i = 0; i < 9; ++i) permuted.col(static_cast<Eigen::Index>(i)) = dense.col(static_cast<Eigen::Index>(perm[i]));
  const auto pp = exact_support_posterior(permuted, meas.z, 0.3, 10.0, meas.noise_std);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(pp[i], p[perm[i]], 1e-12);
    EXPECT_GE(p[i], 0.0);
    EXPECT_LE(p[i], 1.0);
  }
  const auto pd = exact_support_posterior(dense, meas.z, 0.3, 10.0, meas.noise_std);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(pd[i], p[i], 1e-14);
}

TEST(Oracle, ExtremeObservationsStayFinite) {
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Ones(1, 3);
  const auto p = exact_support_posterior(phi, std::vector<double>{1e4}, 0.1, 10.0, 0.01);
  double expected_active = 0.0;
  for (double v : p) {
    ASSERT_TRUE(std::isfinite(v));
    expected_active += v;
  }
  // the empty pattern cannot explain z, so at least one coordinate is active
  EXPECT_GE(expected_active, 1.0 - 1e-12);
}

TEST(Oracle, Errors) {
  const Eigen::MatrixXd big = Eigen::MatrixXd::Ones(2, 17);
  EXPECT_THROW(exact_support_posterior(big, std::vector<double>{0.0, 0.0}, 0.1, 10.0, 1.0), InvalidSpec);
  EXPECT_NO_THROW(exact_support_posterior(big, std::vector<double>{0.0, 0.0}, 0.1, 10.0, 1.0,
                                          OracleLimit{17}));
  const Eigen::MatrixXd small = Eigen::MatrixXd::Ones(1, 2);
  EXPECT_THROW(exact_support_posterior(small, std::vector<double>{1.0}, 0.1, 10.0, 0.0), InvalidSpec);
  EXPECT_THROW(exact_support_posterior(small, std::vector<double>{1.0, 2.0}, 0.1, 10.0, 1.0),
               DimensionMismatch);
  EXPECT_THROW(exact_support_posterior(small, std::vector<double>{1.0}, 1.5, 10.0, 1.0), InvalidSpec);
}

std::size_t components(const SparseBernoulliMatrix& phi) {
  // union-find over variables (0..n-1) and factors (n..n+m-1)
  const std::size_t n = phi.cols(), m = phi.rows();
  std::vector<std::size_t> parent(n + m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : phi.column(i)) parent[find(i)] = find(n + e.index);
  std::size_t c = 0;
  for (std::size_t v = 0; v < n + m; ++v) c += find(v) == v;
  return c;
}

TEST(RandomTree, ConnectedCycleFreeCoveringGraphs) {
  Rng rng(6);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t m = 1; m <= 7; ++m) {
      const auto phi = random_tree_matrix(n, m, rng);
      EXPECT_EQ(phi.cols(), n);
      EXPECT_EQ(phi.rows(), m);
      EXPECT_TRUE(is_cycle_free(phi));
      EXPECT_EQ(phi.edge_count(), n + m - 1);
      EXPECT_EQ(components(phi), 1u);
      for (std::size_t i = 0; i < n; ++i) EXPECT_GE(phi.column(i).size(), 1u);
      for (std::size_t j = 0; j < m; ++j) EXPECT_GE(phi.row(j).size(), 1u);
    }
  }
  EXPECT_THROW(random_tree_matrix(0, 3, rng), InvalidSpec);
}

TEST(RandomTree, CycleDetection) {
  const auto square = SparseBernoulliMatrix::from_columns(2, {{{0, 1}, {1, 1}}, {{0, 1}, {1, -1}}});
  EXPECT_FALSE(is_cycle_free(square));
  const auto path = SparseBernoulliMatrix::from_columns(2, {{{0, 1}}, {{0, 1}, {1, -1}}, {{1, 1}}});
  EXPECT_TRUE(is_cycle_free(path));
  Rng rng(7);
  EXPECT_FALSE(is_cycle_free(gen_sparse_matrix(128, 64, 3, rng)));
}

}  // namespace
}  // namespace bhtbp
