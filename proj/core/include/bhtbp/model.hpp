#pragma once

// Problem instances for sparse support recovery: K-sparse signals with
// truncated Gaussian magnitudes, column-weight-L {0,+1,-1} measurement
// matrices, their energy-matched Gaussian counterparts, and noisy
// measurements calibrated to a target SNR.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bhtbp {

using Rng = std::mt19937_64;

struct SignalSpec {
  std::size_t n = 128;
  std::size_t k = 12;
  double slab_std = 10.0;
  double mag_lo_ratio = 0.2;
  double mag_hi_ratio = 3.0;

  /// Throws InvalidSpec unless 0 <= k <= n, slab_std > 0 and
  /// 0 <= mag_lo_ratio < mag_hi_ratio.
  void validate() const;
};

/// Support indicator s(x): bit i is 1 iff x_i != 0.
struct StateVector {
  std::vector<std::uint8_t> bits;

  StateVector() = default;
  explicit StateVector(std::size_t n) : bits(n, 0) {}
  explicit StateVector(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const;
  bool operator==(const StateVector&) const = default;

  static StateVector of(std::span<const double> values);
};

struct SparseSignal {
  std::vector<double> values;
  StateVector support;
};

/// One nonzero of a {0,+1,-1} matrix seen from a column (index = row) or
/// from a row (index = column).
struct SignedIndex {
  std::uint32_t index;
  std::int8_t sign;
  bool operator==(const SignedIndex&) const = default;
};

/// Measurement matrix with entries in {0,+1,-1}, stored as column adjacency
/// plus the transposed row adjacency. Generated matrices have exactly
/// col_weight() nonzeros per column; hand-built ones (trees, toy graphs) may
/// be irregular, in which case col_weight() is 0.
class SparseBernoulliMatrix {
 public:
  SparseBernoulliMatrix() = default;

  /// Validates distinct in-range rows and signs in {+1,-1} per column.
  static SparseBernoulliMatrix from_columns(std::size_t m,
                                            std::vector<std::vector<SignedIndex>> cols);

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return cols_.size(); }
  std::size_t col_weight() const { return col_weight_; }
  std::size_t edge_count() const { return edges_; }

  std::span<const SignedIndex> column(std::size_t i) const { return cols_[i]; }
  std::span<const SignedIndex> row(std::size_t j) const { return rows_[j]; }

  /// y = Phi x.
  std::vector<double> apply(std::span<const double> x) const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::size_t m_ = 0;
  std::size_t col_weight_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::vector<SignedIndex>> cols_;
  std::vector<std::vector<SignedIndex>> rows_;
};

/// Dense m x n matrix whose columns all carry squared norm col_energy.
struct DenseMatrix {
  Eigen::MatrixXd entries;
  double col_energy = 0.0;

  std::size_t rows() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries.cols()); }
  std::vector<double> apply(std::span<const double> x) const;
};

struct Measurement {
  std::vector<double> z;
  double noise_std = 0.0;
};

/// Target SNR in dB, or the explicit noiseless setting (sigma_n = 0).
class Snr {
 public:
  static Snr decibels(double db) { return Snr(db, false); }
  static Snr noiseless() { return Snr(0.0, true); }

  bool is_noiseless() const { return noiseless_; }
  double db() const { return db_; }

 private:
  Snr(double db, bool noiseless) : db_(db), noiseless_(noiseless) {}
  double db_;
  bool noiseless_;
};

SparseSignal gen_signal(const SignalSpec& spec, Rng& rng);

/// Each column gets L distinct rows drawn uniformly without replacement and
/// independent equiprobable signs. With avoid_4cycles, columns sharing two
/// or more rows with an earlier column are redrawn (bounded attempts).
/// L = 1 with m = n yields a random signed permutation matrix.
SparseBernoulliMatrix gen_sparse_matrix(std::size_t n, std::size_t m, std::size_t L, Rng& rng,
                                        bool avoid_4cycles = false);

/// I.i.d. standard normal entries, each column rescaled to squared norm L.
DenseMatrix gen_gaussian_matrix(std::size_t n, std::size_t m, double L, Rng& rng);

/// sigma_n = sqrt(energy / (m 10^(snr/10))).
double noise_std_for_snr(double signal_energy, std::size_t m, double snr_db);

/// E[x^2] for x ~ N(0, slab_std^2) conditioned on
/// mag_lo_ratio*slab_std <= |x| <= mag_hi_ratio*slab_std.
double truncated_second_moment(const SignalSpec& spec);

/// Ensemble E||Phi x||^2 = k L E[x^2] for any matrix whose columns have
/// squared norm L.
double expected_measurement_energy(const SignalSpec& spec, double col_energy);

/// z = Phi x0 + n with sigma_n calibrated to the realized energy ||Phi x0||^2.
Measurement measure(const SparseBernoulliMatrix& matrix, const SparseSignal& signal, Snr snr,
                    Rng& rng);
Measurement measure(const DenseMatrix& matrix, const SparseSignal& signal, Snr snr, Rng& rng);

/// As measure(), but sigma_n is calibrated to a caller-supplied reference
/// energy (the ensemble expectation in --snr-ensemble mode).
Measurement measure_with_energy(const SparseBernoulliMatrix& matrix, const SparseSignal& signal,
                                Snr snr, double reference_energy, Rng& rng);
Measurement measure_with_energy(const DenseMatrix& matrix, const SparseSignal& signal, Snr snr,
                                double reference_energy, Rng& rng);

/// State error rate: fraction of disagreeing positions.
double ser(const StateVector& detected, const StateVector& truth);

}  // namespace bhtbp
