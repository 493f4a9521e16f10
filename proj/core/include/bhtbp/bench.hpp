#pragma once

// Monte-Carlo SER experiments: one "point" is (n, k, snr, m, algorithm)
// averaged over independent trials, each with a fresh signal, matrix and
// noise. Sweeps emit one CSV row per point and group rows into SER-vs-M/N
// curves, from which cross points to a target SER are extracted.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bhtbp/baselines.hpp"
#include "bhtbp/bp.hpp"
#include "bhtbp/model.hpp"

namespace bhtbp {

enum class Algorithm {
  BhtBp,          ///< BP posteriors + thresholded hypothesis test
  BhtBpKLargest,  ///< BP posteriors, k smallest log ratios
  Omp,
  Lasso,
};

std::string_view to_string(Algorithm a);
/// Accepts "bht-bp", "bht-bp-k", "omp", "lasso"; throws ParseError otherwise.
Algorithm parse_algorithm(std::string_view s);

std::string format_snr(const Snr& snr);  ///< "inf" when noiseless
Snr parse_snr(std::string_view s);

struct ExperimentConfig {
  std::size_t n = 128;
  std::vector<std::size_t> k_list{12};
  std::vector<Snr> snr_list{Snr::decibels(10), Snr::decibels(20), Snr::decibels(30),
                            Snr::decibels(50)};
  std::vector<double> mn_ratios;  ///< defaults to 0.25, 0.30, ..., 1.00
  std::size_t trials = 300;
  std::uint64_t seed = 1;
  std::vector<Algorithm> algorithms{Algorithm::BhtBp, Algorithm::Omp, Algorithm::Lasso};

  std::size_t col_weight = 3;
  double slab_std = 10.0;
  double mag_lo_ratio = 0.2;
  double mag_hi_ratio = 3.0;
  bool snr_ensemble = false;         ///< calibrate sigma_n to E||Phi x||^2
  bool avoid_4cycles = false;
  bool baselines_on_sparse = false;  ///< run OMP/Lasso on the sparse matrix

  BpConfig bp;
  LassoConfig lasso;

  std::string out;       ///< CSV path; empty means no file
  std::string plot_dir;  ///< one "x y" file per curve when set
  std::string dump_dir;  ///< failure-case instance dumps when set
  bool resume = true;    ///< reuse matching rows already in `out`
  std::size_t threads = 0;  ///< 0 = hardware concurrency

  ExperimentConfig();
  void validate() const;
  /// Distinct measurement counts for mn_ratios, ascending.
  std::vector<std::size_t> measurement_counts() const;
  SignalSpec signal_spec(std::size_t k) const;
};

struct PointSpec {
  std::size_t n = 0;
  std::size_t k = 0;
  Snr snr = Snr::noiseless();
  std::size_t m = 0;
  Algorithm algorithm = Algorithm::BhtBp;
};

struct TrialOutcome {
  std::size_t state_errors = 0;
  std::size_t bp_iterations = 0;
  std::size_t degenerate = 0;
  bool failed = false;  ///< the decoder threw; counted as an empty detection
};

struct PointResult {
  PointSpec spec;
  std::size_t trials = 0;
  std::size_t state_errors = 0;
  double mean_ser = 0.0;
  double std_err = 0.0;
  double mean_bp_iters = 0.0;
  std::size_t degenerate_count = 0;
  std::uint64_t seed = 0;  ///< master seed
};

/// Deterministic per-trial seed from (master seed, k, snr, m, algorithm,
/// trial). The k-largest BHT-BP variant shares the BHT-BP stream so both
/// see identical instances.
std::uint64_t trial_seed(std::uint64_t master, const PointSpec& point, std::size_t trial);

TrialOutcome run_trial(const ExperimentConfig& config, const PointSpec& point,
                       std::size_t trial);
PointResult run_point(const ExperimentConfig& config, const PointSpec& point);

/// sqrt(p (1 - p) / (trials n)).
double ser_std_err(double mean_ser, std::size_t trials, std::size_t n);

struct CurvePoint {
  double mn_ratio = 0.0;
  double mean_ser = 0.0;
  std::size_t trials = 0;
  double std_err = 0.0;
};

struct SerCurve {
  std::string algorithm;
  std::size_t n = 0;
  std::size_t k = 0;
  std::string snr;  ///< as formatted in the CSV
  std::vector<CurvePoint> points;  ///< sorted by mn_ratio
};

/// Rows grouped by (algorithm, n, k, snr), in first-appearance order.
std::vector<SerCurve> curves_from_rows(const std::vector<PointResult>& rows);

/// Runs the Cartesian product k x snr x M/N x algorithm. Rows are appended to
/// config.out as each point finishes; with resume, rows already present for
/// the same point, trial count and seed are reused instead of recomputed.
/// Progress lines go to `log` when given.
std::vector<SerCurve> run_sweep(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Smallest M/N at which the curve first reaches SER <= target, refined by
/// log-linear interpolation between the bracketing points (linear when the
/// lower point has SER = 0). nullopt if never reached.
std::optional<double> cross_point(const SerCurve& curve, double target);

inline constexpr std::string_view kCsvHeader =
    "algorithm,n,k,snr_db,m,mn_ratio,trials,mean_ser,std_err,mean_bp_iters,degenerate_count,seed";

void write_csv_row(std::ostream& os, const PointResult& row);
std::vector<PointResult> read_csv(std::istream& is);
std::vector<PointResult> read_csv_file(const std::string& path);

/// One file per curve, "<algorithm>_n<n>_k<k>_snr<snr>.dat", lines "mn_ratio mean_ser".
void write_plot_data(const std::string& dir, const std::vector<SerCurve>& curves);

}  // namespace bhtbp
