#include "bhtbp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bhtbp/errors.hpp"

namespace bhtbp {

namespace {

constexpr double kNormalizedTol = 1e-8;

double clamp_log(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -kLogRatioCap, kLogRatioCap);
}

void require_normalized(const SpikedDensity& d, const char* what) {
  if (std::abs(d.total() - 1.0) > kNormalizedTol) {
    throw InvalidSpec(std::string("hypothesis_test: ") + what + " is not normalized");
  }
}

}  // namespace

HypothesisDecision hypothesis_test(const SpikedDensity& posterior, const SpikedDensity& prior) {
  require_normalized(posterior, "posterior");
  require_normalized(prior, "prior");
  if (!(posterior.cont.grid == prior.cont.grid)) throw DimensionMismatch("hypothesis_test: grid mismatch");
  // slab mass summed directly rather than as 1 - w, which loses digits near w = 1
  const double slab = posterior.cont.total();
  const double lr = clamp_log(std::log(posterior.spike) - std::log(slab));
  return {static_cast<std::uint8_t>(lr >= 0.0 ? 0 : 1), lr};
}

double integral_log_ratio(const SpikedDensity& posterior, const SpikedDensity& prior) {
  require_normalized(posterior, "posterior");
  require_normalized(prior, "prior");
  const double p_inactive = prior.spike;
  const double p_active = prior.cont.total();
  if (p_active <= 0.0) return kLogRatioCap;
  if (p_inactive <= 0.0) return -kLogRatioCap;

  // f(x|s=0) is the unit atom at zero; f(x|s=1) is the slab rescaled by 1/q.
  double numer = (1.0 / p_inactive) * posterior.spike;
  double denom = 0.0;
  for (std::size_t i = 0; i < prior.cont.mass.size(); ++i) {
    const double f = prior.cont.mass[i];
    if (f <= 0.0) continue;
    const double f_active = f / p_active;
    denom += (f_active / f) * posterior.cont.mass[i];
  }
  const double gamma = p_active / p_inactive;
  return clamp_log(std::log(numer) - std::log(denom) - std::log(gamma));
}

DetectionResult detect_support(std::span<const SpikedDensity> posteriors,
                               const SpikedDensity& prior) {
  DetectionResult r;
  r.support = StateVector(posteriors.size());
  r.log_ratios.resize(posteriors.size());
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const auto d = hypothesis_test(posteriors[i], prior);
    r.support.bits[i] = d.state;
    r.log_ratios[i] = d.log_ratio;
  }
  return r;
}

StateVector detect_support_k(std::span<const double> log_ratios, std::size_t k) {
  if (k > log_ratios.size()) throw InvalidSpec("detect_support_k: k > n");
  std::vector<std::size_t> order(log_ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return log_ratios[a] < log_ratios[b]; });
  StateVector s(log_ratios.size());
  for (std::size_t t = 0; t < k; ++t) s.bits[order[t]] = 1;
  return s;
}

StateVector detect_support_k(std::span<const SpikedDensity> posteriors,
                             const SpikedDensity& prior, std::size_t k) {
  return detect_support_k(detect_support(posteriors, prior).log_ratios, k);
}

}  // namespace bhtbp
