#include "bhtbp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "bhtbp/errors.hpp"

namespace bhtbp {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

OmpResult omp(const Eigen::MatrixXd& A, std::span<const double> z, std::size_t k) {
  const auto m = static_cast<std::size_t>(A.rows());
  const auto n = static_cast<std::size_t>(A.cols());
  if (z.size() != m) throw DimensionMismatch("omp: z length != rows");
  if (k > std::min(m, n)) throw InvalidSpec("omp: k > min(m, n)");

  OmpResult r;
  r.estimate.assign(n, 0.0);
  r.support = StateVector(n);
  const auto zv = as_vector(z);
  Eigen::VectorXd residual = zv;
  Eigen::VectorXd coef;
  std::vector<Eigen::Index> active;

  for (std::size_t step = 0; step < k; ++step) {
    const Eigen::VectorXd corr = A.transpose() * residual;
    Eigen::Index best = -1;
    double best_abs = -1.0;
    for (Eigen::Index j = 0; j < corr.size(); ++j) {
      if (r.support.bits[static_cast<std::size_t>(j)]) continue;
      if (std::abs(corr[j]) > best_abs) {
        best_abs = std::abs(corr[j]);
        best = j;
      }
    }
    active.push_back(best);
    r.support.bits[static_cast<std::size_t>(best)] = 1;
    r.selection_order.push_back(static_cast<std::size_t>(best));

    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t t = 0; t < active.size(); ++t) sub.col(static_cast<Eigen::Index>(t)) = A.col(active[t]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    if (cod.rank() < sub.cols()) r.rank_deficient = true;
    coef = cod.solve(zv);
    residual = zv - sub * coef;
  }
  for (std::size_t t = 0; t < active.size(); ++t) {
    r.estimate[static_cast<std::size_t>(active[t])] = coef[static_cast<Eigen::Index>(t)];
  }
  return r;
}

void LassoConfig::validate() const {
  if (lambda && !(*lambda >= 0.0)) throw InvalidSpec("LassoConfig: lambda must be >= 0");
  if (max_iters < 1) throw InvalidSpec("LassoConfig: max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidSpec("LassoConfig: tol must be positive");
}

double default_lasso_lambda(double noise_std, std::size_t n) {
  return noise_std * std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))));
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

LassoResult lasso(const Eigen::MatrixXd& A, std::span<const double> z, const LassoConfig& config,
                  double noise_std) {
  config.validate();
  if (z.size() != static_cast<std::size_t>(A.rows())) throw DimensionMismatch("lasso: z length != rows");
  const auto n = static_cast<std::size_t>(A.cols());

  LassoResult r;
  r.lambda = config.lambda.value_or(default_lasso_lambda(noise_std, n));
  const double lambda = r.lambda;
  const Eigen::VectorXd col_norm2 = A.colwise().squaredNorm().transpose();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.cols());
  Eigen::VectorXd residual = as_vector(z);

  auto objective = [&] { return 0.5 * residual.squaredNorm() + lambda * x.lpNorm<1>(); };

  for (r.sweeps = 1; r.sweeps <= config.max_iters; ++r.sweeps) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (col_norm2[j] == 0.0) continue;
      const double rho = A.col(j).dot(residual) + col_norm2[j] * x[j];
      const double next = soft_threshold(rho, lambda) / col_norm2[j];
      const double delta = next - x[j];
      if (delta != 0.0) {
        residual.noalias() -= delta * A.col(j);
        x[j] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (config.record_objective) r.objective_trace.push_back(objective());
    if (max_delta < config.tol) {
      r.converged = true;
      break;
    }
  }
  r.sweeps = std::min(r.sweeps, config.max_iters);
  r.estimate.assign(x.data(), x.data() + x.size());
  return r;
}

StateVector k_largest_support(std::span<const double> estimate, std::size_t k) {
  if (k > estimate.size()) throw InvalidSpec("k_largest_support: k > n");
  std::vector<std::size_t> order(estimate.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(estimate[a]) > std::abs(estimate[b]);
  });
  StateVector s(estimate.size());
  for (std::size_t t = 0; t < k; ++t) s.bits[order[t]] = 1;
  return s;
}

}  // namespace bhtbp
