#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "bhtbp/baselines.hpp"
#include "bhtbp/errors.hpp"
#include "oracles.hpp"

namespace bhtbp {
namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::MatrixXd orthonormal(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  return q.leftCols(n);
}

// Greedy path recomputed with an SVD least-squares solve.
std::vector<std::size_t> reference_omp_path(const Eigen::MatrixXd& A, const Eigen::VectorXd& z,
                                            std::size_t k) {
  std::vector<std::size_t> path;
  Eigen::VectorXd r = z;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = 0;
    double best_c = -1.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (std::find(path.begin(), path.end(), static_cast<std::size_t>(j)) != path.end()) continue;
      const double c = std::abs(A.col(j).dot(r));
      if (c > best_c + 1e-12) {
        best_c = c;
        best = static_cast<std::size_t>(j);
      }
    }
    path.push_back(best);
    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(path.size()));
    for (std::size_t t = 0; t < path.size(); ++t) sub.col(static_cast<Eigen::Index>(t)) = A.col(static_cast<Eigen::Index>(path[t]));
    const Eigen::VectorXd coef = sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(z);
    r = z - sub * coef;
  }
  return path;
}

TEST(Omp, HandInstancePath) {
  Eigen::MatrixXd A(3, 4);
  A << 1, 0, 0, 1,
       0, 1, 0, 1,
       0, 0, 1, 0;
  const std::vector<double> z{2.0, 1.0, 0.5};
  const auto r = omp(A, z, 3);
  EXPECT_EQ(r.selection_order, (std::vector<std::size_t>{3, 0, 2}));
  EXPECT_EQ(r.selection_order, reference_omp_path(A, Eigen::Vector3d(2.0, 1.0, 0.5), 3));
  const std::vector<double> expect{1.0, 0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.estimate[i], expect[i], 1e-12);
  EXPECT_EQ(r.support.bits, (std::vector<std::uint8_t>{1, 0, 1, 1}));
  EXPECT_FALSE(r.rank_deficient);
}

TEST(Omp, RandomPathsMatchReference) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto A = gen_gaussian_matrix(30, 15, 3.0, rng);
    const auto x = gen_signal({30, 4, 10.0, 0.2, 3.0}, rng);
    const auto meas = measure(A, x, Snr::decibels(20.0), rng);
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(meas.z.data(), 15);
    const auto r = omp(A, meas.z, 6);
    EXPECT_EQ(r.selection_order, reference_omp_path(A.entries, z, 6));
    EXPECT_EQ(r.support.popcount(), 6u);
  }
}

TEST(Omp, OrthogonalNoiselessIsExact) {
  const Eigen::MatrixXd A = std::sqrt(3.0) * orthonormal(12, 12, 2);
  Rng rng(3);
  const auto x = gen_signal({12, 4, 10.0, 0.2, 3.0}, rng);
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.values.data(), 12);
  const auto z = to_std(A * xv);
  const auto r = omp(A, z, 4);
  EXPECT_EQ(r.support, x.support);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(r.estimate[i], x.values[i], 1e-10);
}

TEST(Omp, ZeroStepsAndErrors) {
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 4);
  const auto r = omp(A, std::vector<double>{1.0, 2.0, 3.0}, 0);
  EXPECT_EQ(r.support.popcount(), 0u);
  for (double v : r.estimate) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(omp(A, std::vector<double>{1.0, 2.0, 3.0}, 4), InvalidSpec);
  EXPECT_THROW(omp(A, std::vector<double>{1.0, 2.0}, 1), DimensionMismatch);
}

TEST(Omp, DuplicateColumnFlagsRankDeficiency) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 1,
       0, 0;
  const auto r = omp(A, std::vector<double>{1.0, 0.0}, 2);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.support.popcount(), 2u);
  EXPECT_NEAR(r.estimate[0] + r.estimate[1], 1.0, 1e-12);
}

TEST(Lasso, LargeLambdaGivesZero) {
  Rng rng(4);
  const auto A = gen_gaussian_matrix(20, 10, 3.0, rng);
  const auto x = gen_signal({20, 3, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(A, x, Snr::decibels(20.0), rng);
  const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(meas.z.data(), 10);
  LassoConfig cfg;
  cfg.lambda = (A.entries.transpose() * z).cwiseAbs().maxCoeff();
  const auto r = lasso(A, meas.z, cfg);
  for (double v : r.estimate) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Lasso, OrthonormalDesignIsSoftThresholding) {
  const Eigen::MatrixXd A = orthonormal(16, 10, 5);
  Rng rng(6);
  std::normal_distribution<double> nd(0.0, 3.0);
  Eigen::VectorXd z(16);
  for (auto& v : z) v = nd(rng);
  LassoConfig cfg;
  cfg.lambda = 1.7;
  const auto r = lasso(A, to_std(z), cfg);
  const auto ref = oracle::orthonormal_lasso(to_std(A.transpose() * z), 1.7);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(r.estimate[i], ref[i], 1e-9);
}

TEST(Lasso, ZeroLambdaIsLeastSquares) {
  Rng rng(7);
  const auto A = gen_gaussian_matrix(8, 8, 3.0, rng);
  std::normal_distribution<double> nd;
  Eigen::VectorXd z(8);
  for (auto& v : z) v = nd(rng);
  LassoConfig cfg;
  cfg.lambda = 0.0;
  cfg.max_iters = 200000;
  cfg.tol = 1e-12;
  const auto r = lasso(A, to_std(z), cfg);
  const Eigen::VectorXd ls = A.entries.colPivHouseholderQr().solve(z);
  ASSERT_TRUE(r.converged);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(r.estimate[i], ls(static_cast<Eigen::Index>(i)), 1e-6);
}

TEST(Lasso, ObjectiveNeverIncreases) {
  Rng rng(8);
  const auto A = gen_gaussian_matrix(128, 51, 3.0, rng);
  const auto x = gen_signal({128, 12, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(A, x, Snr::decibels(20.0), rng);
  LassoConfig cfg;
  cfg.record_objective = true;
  const auto r = lasso(A, meas.z, cfg, meas.noise_std);
  EXPECT_DOUBLE_EQ(r.lambda, meas.noise_std * std::sqrt(2.0 * std::log(128.0)));
  ASSERT_GE(r.objective_trace.size(), 2u);
  for (std::size_t s = 1; s < r.objective_trace.size(); ++s) {
    EXPECT_LE(r.objective_trace[s], r.objective_trace[s - 1] * (1.0 + 1e-12)) << "sweep " << s;
  }
}

TEST(Lasso, NonConvergenceIsFlagged) {
  Rng rng(9);
  const auto A = gen_gaussian_matrix(64, 20, 3.0, rng);
  const auto x = gen_signal({64, 8, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(A, x, Snr::decibels(30.0), rng);
  LassoConfig cfg;
  cfg.max_iters = 1;
  const auto r = lasso(A, meas.z, cfg, meas.noise_std);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.sweeps, 1u);
}

TEST(Lasso, ConfigValidation) {
  LassoConfig cfg;
  cfg.lambda = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidSpec);
  cfg = {};
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidSpec);
  EXPECT_DOUBLE_EQ(default_lasso_lambda(2.0, 100), 2.0 * std::sqrt(2.0 * std::log(100.0)));
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
}

TEST(Baselines, Deterministic) {
  Rng rng(10);
  const auto A = gen_gaussian_matrix(64, 30, 3.0, rng);
  const auto x = gen_signal({64, 6, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(A, x, Snr::decibels(20.0), rng);
  EXPECT_EQ(omp(A, meas.z, 6).estimate, omp(A, meas.z, 6).estimate);
  EXPECT_EQ(lasso(A, meas.z, {}, meas.noise_std).estimate, lasso(A, meas.z, {}, meas.noise_std).estimate);
}

TEST(KLargest, Examples) {
  EXPECT_EQ(k_largest_support(std::vector<double>{3.0, -5.0, 0.5, -0.5}, 2).bits,
            (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(k_largest_support(std::vector<double>{3.0, -5.0, 0.5, -0.5}, 4).popcount(), 4u);
  EXPECT_EQ(k_largest_support(std::vector<double>{0.0, 2.0, 0.0, -1.0}, 2).bits,
            (std::vector<std::uint8_t>{0, 1, 0, 1}));
  EXPECT_EQ(k_largest_support(std::vector<double>{1.0, -1.0, 1.0}, 2).bits,
            (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(k_largest_support(std::vector<double>(5, 0.0), 3).popcount(), 3u);
  EXPECT_THROW(k_largest_support(std::vector<double>{1.0}, 2), InvalidSpec);
}

}  // namespace
}  // namespace bhtbp
