#include "bhtbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bhtbp/errors.hpp"

namespace bhtbp {

namespace {

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Uniform k-subset of {0..n-1} by partial Fisher-Yates.
std::vector<std::uint32_t> sample_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t t = 0; t < k; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, n - 1);
    std::swap(idx[t], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::vector<double> add_noise(std::vector<double> clean, double sigma, Rng& rng) {
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : clean) v += noise(rng);
  }
  return clean;
}

double energy(std::span<const double> y) {
  return std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
}

template <typename Matrix>
Measurement measure_impl(const Matrix& matrix, const SparseSignal& signal, Snr snr,
                         const double* reference_energy, Rng& rng) {
  if (signal.values.size() != matrix.cols()) {
    throw DimensionMismatch("measure: signal length " + std::to_string(signal.values.size()) +
                            " != matrix columns " + std::to_string(matrix.cols()));
  }
  std::vector<double> clean = matrix.apply(signal.values);
  Measurement out;
  if (!snr.is_noiseless()) {
    const double e = reference_energy ? *reference_energy : energy(clean);
    out.noise_std = noise_std_for_snr(e, matrix.rows(), snr.db());
  }
  out.z = add_noise(std::move(clean), out.noise_std, rng);
  return out;
}

}  // namespace

void SignalSpec::validate() const {
  if (k > n) throw InvalidSpec("SignalSpec: k > n");
  if (!(slab_std > 0.0)) throw InvalidSpec("SignalSpec: slab_std must be positive");
  if (!(mag_lo_ratio >= 0.0 && mag_lo_ratio < mag_hi_ratio)) {
    throw InvalidSpec("SignalSpec: need 0 <= mag_lo_ratio < mag_hi_ratio");
  }
}

std::size_t StateVector::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

StateVector StateVector::of(std::span<const double> values) {
  StateVector s(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.bits[i] = values[i] != 0.0 ? 1 : 0;
  return s;
}

SparseBernoulliMatrix SparseBernoulliMatrix::from_columns(
    std::size_t m, std::vector<std::vector<SignedIndex>> cols) {
  SparseBernoulliMatrix out;
  out.m_ = m;
  out.rows_.assign(m, {});
  bool regular = !cols.empty();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    auto& col = cols[i];
    std::sort(col.begin(), col.end(),
              [](const SignedIndex& a, const SignedIndex& b) { return a.index < b.index; });
    for (std::size_t t = 0; t < col.size(); ++t) {
      if (col[t].index >= m) throw InvalidSpec("matrix column " + std::to_string(i) + ": row out of range");
      if (col[t].sign != 1 && col[t].sign != -1) {
        throw InvalidSpec("matrix column " + std::to_string(i) + ": sign must be +1 or -1");
      }
      if (t > 0 && col[t].index == col[t - 1].index) {
        throw InvalidSpec("matrix column " + std::to_string(i) + ": repeated row");
      }
      out.rows_[col[t].index].push_back({static_cast<std::uint32_t>(i), col[t].sign});
    }
    out.edges_ += col.size();
    if (col.size() != cols.front().size()) regular = false;
  }
  out.col_weight_ = regular ? cols.front().size() : 0;
  out.cols_ = std::move(cols);
  return out;
}

std::vector<double> SparseBernoulliMatrix::apply(std::span<const double> x) const {
  if (x.size() != cols()) throw DimensionMismatch("SparseBernoulliMatrix::apply: size mismatch");
  std::vector<double> y(m_, 0.0);
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (const auto& e : cols_[i]) y[e.index] += e.sign * x[i];
  }
  return y;
}

Eigen::MatrixXd SparseBernoulliMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_),
                                            static_cast<Eigen::Index>(cols()));
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    for (const auto& e : cols_[i]) d(e.index, static_cast<Eigen::Index>(i)) = e.sign;
  }
  return d;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  if (x.size() != cols()) throw DimensionMismatch("DenseMatrix::apply: size mismatch");
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd y = entries * xv;
  return {y.data(), y.data() + y.size()};
}

SparseSignal gen_signal(const SignalSpec& spec, Rng& rng) {
  spec.validate();
  SparseSignal s;
  s.values.assign(spec.n, 0.0);
  s.support = StateVector(spec.n);
  const double lo = spec.mag_lo_ratio * spec.slab_std;
  const double hi = spec.mag_hi_ratio * spec.slab_std;
  std::normal_distribution<double> slab(0.0, spec.slab_std);
  for (std::uint32_t i : sample_subset(spec.n, spec.k, rng)) {
    double v;
    do {
      v = slab(rng);
    } while (std::abs(v) < lo || std::abs(v) > hi || v == 0.0);
    s.values[i] = v;
    s.support.bits[i] = 1;
  }
  return s;
}

SparseBernoulliMatrix gen_sparse_matrix(std::size_t n, std::size_t m, std::size_t L, Rng& rng,
                                        bool avoid_4cycles) {
  if (L < 1 || L > m) throw InvalidSpec("gen_sparse_matrix: need 1 <= L <= m");
  if (m > n) throw InvalidSpec("gen_sparse_matrix: need m <= n");
  constexpr int kMaxRedraws = 100;
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<std::vector<SignedIndex>> cols(n);
  // row -> columns touching it, only maintained for 4-cycle avoidance
  std::vector<std::vector<std::uint32_t>> touched(avoid_4cycles ? m : 0);

  auto shares_two_rows = [&](const std::vector<std::uint32_t>& rows) {
    std::vector<std::uint32_t> seen;
    for (std::uint32_t r : rows) seen.insert(seen.end(), touched[r].begin(), touched[r].end());
    std::sort(seen.begin(), seen.end());
    return std::adjacent_find(seen.begin(), seen.end()) != seen.end();
  };

  // L = 1 with m = n: a random signed permutation, so no two columns share a
  // row. Each column's row is still uniform on its own.
  const std::vector<std::uint32_t> perm =
      (L == 1 && m == n) ? sample_subset(n, n, rng) : std::vector<std::uint32_t>{};

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> rows = perm.empty() ? sample_subset(m, L, rng)
                                                   : std::vector<std::uint32_t>{perm[i]};
    if (avoid_4cycles) {
      for (int attempt = 0; attempt < kMaxRedraws && shares_two_rows(rows); ++attempt) {
        rows = sample_subset(m, L, rng);
      }
      for (std::uint32_t r : rows) touched[r].push_back(static_cast<std::uint32_t>(i));
    }
    cols[i].reserve(L);
    for (std::uint32_t r : rows) {
      cols[i].push_back({r, static_cast<std::int8_t>(coin(rng) ? 1 : -1)});
    }
  }
  return SparseBernoulliMatrix::from_columns(m, std::move(cols));
}

DenseMatrix gen_gaussian_matrix(std::size_t n, std::size_t m, double L, Rng& rng) {
  if (n < 1 || m < 1) throw InvalidSpec("gen_gaussian_matrix: need m, n >= 1");
  if (!(L > 0.0)) throw InvalidSpec("gen_gaussian_matrix: column energy must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix out;
  out.col_energy = L;
  out.entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < out.entries.cols(); ++c) {
    double norm2 = 0.0;
    while (norm2 == 0.0) {
      for (Eigen::Index r = 0; r < out.entries.rows(); ++r) out.entries(r, c) = gauss(rng);
      norm2 = out.entries.col(c).squaredNorm();
    }
    out.entries.col(c) *= std::sqrt(L / norm2);
  }
  return out;
}

double noise_std_for_snr(double signal_energy, std::size_t m, double snr_db) {
  if (signal_energy < 0.0) throw std::invalid_argument("noise_std_for_snr: negative energy");
  if (m < 1) throw std::invalid_argument("noise_std_for_snr: m must be >= 1");
  return std::sqrt(signal_energy / (static_cast<double>(m) * std::pow(10.0, snr_db / 10.0)));
}

double truncated_second_moment(const SignalSpec& spec) {
  spec.validate();
  const double a = spec.mag_lo_ratio;
  const double b = spec.mag_hi_ratio;
  const double mass = std_normal_cdf(b) - std_normal_cdf(a);
  const double ratio = (a * std_normal_pdf(a) - b * std_normal_pdf(b)) / mass;
  return spec.slab_std * spec.slab_std * (1.0 + ratio);
}

double expected_measurement_energy(const SignalSpec& spec, double col_energy) {
  return static_cast<double>(spec.k) * col_energy * truncated_second_moment(spec);
}

Measurement measure(const SparseBernoulliMatrix& matrix, const SparseSignal& signal, Snr snr,
                    Rng& rng) {
  return measure_impl(matrix, signal, snr, nullptr, rng);
}

Measurement measure(const DenseMatrix& matrix, const SparseSignal& signal, Snr snr, Rng& rng) {
  return measure_impl(matrix, signal, snr, nullptr, rng);
}

Measurement measure_with_energy(const SparseBernoulliMatrix& matrix, const SparseSignal& signal,
                                Snr snr, double reference_energy, Rng& rng) {
  return measure_impl(matrix, signal, snr, &reference_energy, rng);
}

Measurement measure_with_energy(const DenseMatrix& matrix, const SparseSignal& signal, Snr snr,
                                double reference_energy, Rng& rng) {
  return measure_impl(matrix, signal, snr, &reference_energy, rng);
}

double ser(const StateVector& detected, const StateVector& truth) {
  if (detected.size() != truth.size()) throw DimensionMismatch("ser: length mismatch");
  if (truth.size() == 0) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) errors += detected.bits[i] != truth.bits[i];
  return static_cast<double>(errors) / static_cast<double>(truth.size());
}

}  // namespace bhtbp
