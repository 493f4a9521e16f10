#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bhtbp/bp.hpp"
#include "bhtbp/detector.hpp"
#include "bhtbp/errors.hpp"
#include "bhtbp/oracle.hpp"
#include "oracles.hpp"

namespace bhtbp {
namespace {

const Grid kGrid = Grid::symmetric(40.0, 513);

SpikedDensity with_spike(double w) {
  SpikedDensity d = spike_and_slab(1.0 - w, 10.0, kGrid);
  return d;
}

TEST(HypothesisTest, PureSpikeIsCapped) {
  const auto prior = with_spike(0.9);
  const auto d = hypothesis_test(with_spike(1.0), prior);
  EXPECT_EQ(d.state, 0);
  EXPECT_EQ(d.log_ratio, kLogRatioCap);
  const auto a = hypothesis_test(with_spike(0.0), prior);
  EXPECT_EQ(a.state, 1);
  EXPECT_EQ(a.log_ratio, -kLogRatioCap);
}

TEST(HypothesisTest, TieDecidesInactive) {
  const auto d = hypothesis_test(with_spike(0.5), with_spike(0.9));
  EXPECT_EQ(d.state, 0);
  EXPECT_NEAR(d.log_ratio, 0.0, 1e-12);
}

TEST(HypothesisTest, RejectsUnnormalizedAndMismatchedInput) {
  auto bad = with_spike(0.5);
  bad.spike = 0.7;
  EXPECT_THROW(hypothesis_test(bad, with_spike(0.9)), InvalidSpec);
  EXPECT_THROW(hypothesis_test(with_spike(0.9), bad), InvalidSpec);
  EXPECT_THROW(integral_log_ratio(bad, with_spike(0.9)), InvalidSpec);
  const auto other = spike_and_slab(0.1, 10.0, Grid::symmetric(40.0, 257));
  EXPECT_THROW(hypothesis_test(with_spike(0.5), other), DimensionMismatch);
}

TEST(HypothesisTest, MonotoneInSpikeWeight) {
  const auto prior = with_spike(0.9);
  int last = 1;
  double last_lr = -1e300;
  for (double w = 0.0; w <= 1.0; w += 0.01) {
    const auto d = hypothesis_test(with_spike(w), prior);
    EXPECT_LE(d.state, last);
    EXPECT_GE(d.log_ratio, last_lr);
    last = d.state;
    last_lr = d.log_ratio;
  }
}

TEST(HypothesisTest, IntegralFormAgreesOnDecodedPosteriors) {
  Rng rng(1);
  const auto phi = gen_sparse_matrix(128, 51, 3, rng);
  const auto x = gen_signal({128, 12, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(phi, x, Snr::decibels(30.0), rng);
  const auto prior = make_prior(12.0 / 128.0, 10.0, BpConfig{});
  const auto r = run(phi, meas, prior, BpConfig{});
  std::size_t finite = 0;
  for (const auto& post : r.posteriors) {
    const auto reduced = hypothesis_test(post, prior);
    const double literal = integral_log_ratio(post, prior);
    EXPECT_EQ(reduced.state, literal >= 0.0 ? 0 : 1);
    if (std::abs(reduced.log_ratio) < kLogRatioCap && std::abs(literal) < kLogRatioCap) {
      EXPECT_NEAR(reduced.log_ratio, literal, 1e-6);
      ++finite;
    }
  }
  EXPECT_GT(finite, 64u);
}

// z = x + n with x ~ 0.5 delta + 0.5 N(0, 9), n ~ N(0, 1): the decision flips
// at |z| = sqrt((10/9) ln 10).
TEST(HypothesisTest, ScalarThresholdWithinOneBin) {
  const double expected = std::sqrt(10.0 / 9.0 * std::log(10.0));
  ASSERT_NEAR(oracle::scalar_threshold(0.5, 3.0, 1.0), expected, 1e-12);
  ASSERT_NEAR(expected, 1.599, 1e-3);

  const auto phi = SparseBernoulliMatrix::from_columns(1, {{{0, 1}}});
  const BpConfig cfg;
  const auto prior = make_prior(0.5, 3.0, cfg);
  auto decide = [&](double z) {
    const auto r = run(phi, Measurement{{z}, 1.0}, prior, cfg);
    return hypothesis_test(r.posteriors[0], prior).state;
  };
  for (double sign : {1.0, -1.0}) {
    double lo = 1.0, hi = 2.0;
    ASSERT_EQ(decide(sign * lo), 0);
    ASSERT_EQ(decide(sign * hi), 1);
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (decide(sign * mid) == 0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(lo, expected, prior.cont.grid.spacing()) << "sign " << sign;
  }
}

TEST(DetectSupport, PriorOnlyIsEmpty) {
  const auto prior = with_spike(0.9);
  const std::vector<SpikedDensity> posts(10, prior);
  const auto r = detect_support(posts, prior);
  EXPECT_EQ(r.support.popcount(), 0u);
  for (double lr : r.log_ratios) EXPECT_NEAR(lr, std::log(9.0), 1e-9);
}

TEST(DetectSupport, NoiselessDecoupledChannelsAreExact) {
  Rng rng(2);
  std::vector<std::vector<SignedIndex>> cols(32);
  for (std::uint32_t i = 0; i < 32; ++i) cols[i].push_back({i, static_cast<std::int8_t>(i % 3 ? 1 : -1)});
  const auto phi = SparseBernoulliMatrix::from_columns(32, cols);
  const auto x = gen_signal({32, 5, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(phi, x, Snr::noiseless(), rng);
  const auto prior = make_prior(5.0 / 32.0, 10.0, BpConfig{});
  const auto r = run(phi, meas, prior, BpConfig{});
  EXPECT_EQ(detect_support(r.posteriors, prior).support, x.support);
}

TEST(DetectSupport, TreeInstancesMatchExactMap) {
  Rng rng(3);
  BpConfig cfg;
  const double q = 0.3, noise = 1.0;
  std::size_t close_calls = 0;
  for (int t = 0; t < 20; ++t) {
    const auto phi = random_tree_matrix(8, 5, rng);
    cfg.max_iters = 2 * (8 + 5);
    const auto x = gen_signal({8, 2, 10.0, 0.2, 3.0}, rng);
    Measurement meas{phi.apply(x.values), noise};
    std::normal_distribution<double> nd(0.0, noise);
    for (double& z : meas.z) z += nd(rng);
    const auto prior = make_prior(q, 10.0, cfg);
    const auto det = detect_support(run(phi, meas, prior, cfg).posteriors, prior);
    const auto exact = exact_support_posterior(phi, meas.z, q, 10.0, noise);
    const auto map = exact_map_support(phi, meas.z, q, 10.0, noise);
    for (std::size_t i = 0; i < 8; ++i) {
      if (det.support.bits[i] != map.bits[i]) {
        EXPECT_LT(std::abs(exact[i] - 0.5), 0.02) << "trial " << t << " i " << i;
        ++close_calls;
      }
    }
  }
  EXPECT_LE(close_calls, 2u);
}

TEST(DetectSupportK, EdgeCasesAndTies) {
  const std::vector<double> lr{0.5, -1.0, 0.5, -1.0, 2.0};
  EXPECT_EQ(detect_support_k(lr, 0).popcount(), 0u);
  EXPECT_EQ(detect_support_k(lr, 5).popcount(), 5u);
  EXPECT_EQ(detect_support_k(lr, 1).bits, (std::vector<std::uint8_t>{0, 1, 0, 0, 0}));
  EXPECT_EQ(detect_support_k(lr, 3).bits, (std::vector<std::uint8_t>{1, 1, 0, 1, 0}));
  EXPECT_THROW(detect_support_k(lr, 6), InvalidSpec);
}

TEST(DetectSupportK, AgreesWithThresholdAtItsPopcount) {
  Rng rng(4);
  const auto phi = gen_sparse_matrix(64, 32, 3, rng);
  const auto x = gen_signal({64, 6, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(phi, x, Snr::decibels(30.0), rng);
  const auto prior = make_prior(6.0 / 64.0, 10.0, BpConfig{});
  const auto r = run(phi, meas, prior, BpConfig{});
  const auto thr = detect_support(r.posteriors, prior);
  EXPECT_EQ(detect_support_k(r.posteriors, prior, thr.support.popcount()), thr.support);
}

}  // namespace
}  // namespace bhtbp
