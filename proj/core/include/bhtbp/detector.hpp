#pragma once

// Per-coordinate Bayesian hypothesis test on BP posteriors.
//
// H0: s_i = 0 against H1: s_i = 1, deciding H0 when
// Pr{s_i = 0 | z} / Pr{s_i = 1 | z} >= 1. With the spike carried as its own
// atom, Pr{s_i = 0 | z} is exactly the posterior spike weight, so the ratio
// is w / (1 - w). The prior-reweighted integral form is kept alongside as a
// cross-check.

#include <cstdint>
#include <span>
#include <vector>

#include "bhtbp/density.hpp"
#include "bhtbp/model.hpp"

namespace bhtbp {

/// log ratios are clamped to [-kLogRatioCap, kLogRatioCap].
inline constexpr double kLogRatioCap = 700.0;

struct HypothesisDecision {
  std::uint8_t state = 0;  ///< 0 = H0 (inactive), 1 = H1 (active)
  double log_ratio = 0.0;  ///< log Pr{s=0|z} - log Pr{s=1|z}
};

struct DetectionResult {
  StateVector support;
  std::vector<double> log_ratios;
};

/// Reduced form: log(w) - log(1 - w). Ties (ratio exactly 1) decide s = 0.
/// Throws InvalidSpec if either density is not normalized.
HypothesisDecision hypothesis_test(const SpikedDensity& posterior, const SpikedDensity& prior);

/// Integral form: log of
///   [int f(x|s=0)/f(x) post(x) dx] / [int f(x|s=1)/f(x) post(x) dx]
/// minus log(q / (1 - q)), evaluated atom by atom on the grid.
double integral_log_ratio(const SpikedDensity& posterior, const SpikedDensity& prior);

DetectionResult detect_support(std::span<const SpikedDensity> posteriors,
                               const SpikedDensity& prior);

/// The k coordinates with the smallest log ratio; ties go to the lower index.
StateVector detect_support_k(std::span<const double> log_ratios, std::size_t k);
StateVector detect_support_k(std::span<const SpikedDensity> posteriors,
                             const SpikedDensity& prior, std::size_t k);

}  // namespace bhtbp
