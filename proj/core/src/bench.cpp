#include "bhtbp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "bhtbp/detector.hpp"
#include "bhtbp/errors.hpp"
#include "bhtbp/instance_io.hpp"

namespace bhtbp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool is_bp(Algorithm a) { return a == Algorithm::BhtBp || a == Algorithm::BhtBpKLargest; }

std::size_t count_errors(const StateVector& detected, const StateVector& truth) {
  std::size_t e = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) e += detected.bits[i] != truth.bits[i];
  return e;
}

void dump_failure(const ExperimentConfig& config, const PointSpec& point, std::size_t trial,
                  std::uint64_t seed, const SparseBernoulliMatrix& matrix,
                  const SparseSignal& signal, const Measurement& meas) {
  if (config.dump_dir.empty()) return;
  std::filesystem::create_directories(config.dump_dir);
  const std::string name = std::string(to_string(point.algorithm)) + "_k" + std::to_string(point.k) +
                           "_snr" + format_snr(point.snr) + "_m" + std::to_string(point.m) + "_t" +
                           std::to_string(trial) + ".txt";
  std::ofstream out(std::filesystem::path(config.dump_dir) / name);
  write_instance(out, matrix, seed, &signal, &meas);
}

Measurement take_measurement(const ExperimentConfig& config, const SignalSpec& spec,
                             const auto& matrix, const SparseSignal& signal, Snr snr, Rng& rng) {
  if (config.snr_ensemble) {
    const double energy = expected_measurement_energy(spec, static_cast<double>(config.col_weight));
    return measure_with_energy(matrix, signal, snr, energy, rng);
  }
  return measure(matrix, signal, snr, rng);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

using RowKey = std::tuple<std::string, std::size_t, std::size_t, std::string, std::size_t,
                          std::size_t, std::uint64_t>;

RowKey key_of(const PointResult& r) {
  return {std::string(to_string(r.spec.algorithm)), r.spec.n, r.spec.k, format_snr(r.spec.snr),
          r.spec.m, r.trials, r.seed};
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::BhtBp: return "bht-bp";
    case Algorithm::BhtBpKLargest: return "bht-bp-k";
    case Algorithm::Omp: return "omp";
    case Algorithm::Lasso: return "lasso";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "bht-bp") return Algorithm::BhtBp;
  if (s == "bht-bp-k") return Algorithm::BhtBpKLargest;
  if (s == "omp") return Algorithm::Omp;
  if (s == "lasso") return Algorithm::Lasso;
  throw ParseError("unknown algorithm '" + std::string(s) + "'");
}

std::string format_snr(const Snr& snr) { return snr.is_noiseless() ? "inf" : format_real(snr.db()); }

Snr parse_snr(std::string_view s) {
  if (s == "inf" || s == "noiseless") return Snr::noiseless();
  std::string buf(s);
  char* end = nullptr;
  const double db = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(db)) {
    throw ParseError("bad SNR '" + buf + "'");
  }
  return Snr::decibels(db);
}

ExperimentConfig::ExperimentConfig() {
  for (int i = 0; i <= 15; ++i) mn_ratios.push_back(0.25 + 0.05 * i);
}

void ExperimentConfig::validate() const {
  if (n < 1) throw InvalidSpec("config: n must be >= 1");
  if (trials < 1) throw InvalidSpec("config: trials must be >= 1");
  if (k_list.empty() || snr_list.empty() || mn_ratios.empty() || algorithms.empty()) {
    throw InvalidSpec("config: k, snr_db, mn_ratios and algorithms must be non-empty");
  }
  for (std::size_t k : k_list) signal_spec(k).validate();
  for (double r : mn_ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidSpec("config: every M/N must lie in (0, 1]");
  }
  for (std::size_t m : measurement_counts()) {
    if (col_weight < 1 || col_weight > m) throw InvalidSpec("config: need 1 <= col_weight <= m");
  }
  bp.validate();
  lasso.validate();
}

std::vector<std::size_t> ExperimentConfig::measurement_counts() const {
  std::vector<std::size_t> ms;
  for (double r : mn_ratios) {
    ms.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(r * static_cast<double>(n)))));
  }
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  return ms;
}

SignalSpec ExperimentConfig::signal_spec(std::size_t k) const {
  return SignalSpec{n, k, slab_std, mag_lo_ratio, mag_hi_ratio};
}

std::uint64_t trial_seed(std::uint64_t master, const PointSpec& point, std::size_t trial) {
  const Algorithm stream =
      point.algorithm == Algorithm::BhtBpKLargest ? Algorithm::BhtBp : point.algorithm;
  const std::uint64_t snr_bits =
      point.snr.is_noiseless() ? ~std::uint64_t{0} : std::bit_cast<std::uint64_t>(point.snr.db());
  std::uint64_t h = splitmix64(master);
  h = combine(h, point.n);
  h = combine(h, point.k);
  h = combine(h, snr_bits);
  h = combine(h, point.m);
  h = combine(h, fnv1a(to_string(stream)));
  h = combine(h, trial);
  return h;
}

TrialOutcome run_trial(const ExperimentConfig& config, const PointSpec& point,
                       std::size_t trial) {
  const std::uint64_t seed = trial_seed(config.seed, point, trial);
  Rng rng(seed);
  SignalSpec spec = config.signal_spec(point.k);
  spec.n = point.n;
  const SparseSignal signal = gen_signal(spec, rng);

  TrialOutcome out;
  StateVector detected(point.n);
  if (is_bp(point.algorithm)) {
    const auto matrix = gen_sparse_matrix(point.n, point.m, config.col_weight, rng, config.avoid_4cycles);
    const auto meas = take_measurement(config, spec, matrix, signal, point.snr, rng);
    try {
      const double q = static_cast<double>(point.k) / static_cast<double>(point.n);
      const SpikedDensity prior = make_prior(q, config.slab_std, config.bp);
      const BpResult res = run(matrix, meas, prior, config.bp);
      out.bp_iterations = res.diagnostics.iterations;
      out.degenerate = res.diagnostics.degenerate_count;
      detected = point.algorithm == Algorithm::BhtBp
                     ? detect_support(res.posteriors, prior).support
                     : detect_support_k(res.posteriors, prior, point.k);
    } catch (const std::exception&) {
      out.failed = true;
    }
    if (out.failed || out.degenerate > 0) {
      dump_failure(config, point, trial, seed, matrix, signal, meas);
    }
  } else {
    DenseMatrix matrix;
    if (config.baselines_on_sparse) {
      matrix.entries = gen_sparse_matrix(point.n, point.m, config.col_weight, rng, config.avoid_4cycles).to_dense();
      matrix.col_energy = static_cast<double>(config.col_weight);
    } else {
      matrix = gen_gaussian_matrix(point.n, point.m, static_cast<double>(config.col_weight), rng);
    }
    const auto meas = take_measurement(config, spec, matrix, signal, point.snr, rng);
    try {
      const std::vector<double> estimate =
          point.algorithm == Algorithm::Omp
              ? omp(matrix, meas.z, std::min({point.k, point.m, point.n})).estimate
              : lasso(matrix, meas.z, config.lasso, meas.noise_std).estimate;
      detected = k_largest_support(estimate, point.k);
    } catch (const std::exception&) {
      out.failed = true;
    }
  }
  if (out.failed) detected = StateVector(point.n);
  out.state_errors = count_errors(detected, signal.support);
  return out;
}

double ser_std_err(double mean_ser, std::size_t trials, std::size_t n) {
  const double samples = static_cast<double>(trials) * static_cast<double>(n);
  return std::sqrt(std::max(0.0, mean_ser * (1.0 - mean_ser)) / samples);
}

PointResult run_point(const ExperimentConfig& config, const PointSpec& point) {
  if (point.m > point.n) throw InvalidSpec("run_point: m > n");
  std::vector<TrialOutcome> outcomes(config.trials);
  std::size_t workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, config.trials);

  if (workers == 1) {
    for (std::size_t t = 0; t < config.trials; ++t) outcomes[t] = run_trial(config, point, t);
  } else {
    // dynamic hand-out of trial indices; each outcome lands in its own slot,
    // so the reduction below is independent of scheduling
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < config.trials; t = next++) {
          outcomes[t] = run_trial(config, point, t);
        }
      });
    }
  }

  PointResult r;
  r.spec = point;
  r.trials = config.trials;
  r.seed = config.seed;
  std::size_t iters = 0;
  for (const auto& o : outcomes) {
    r.state_errors += o.state_errors;
    iters += o.bp_iterations;
    r.degenerate_count += o.degenerate + (o.failed ? 1 : 0);
  }
  const double samples = static_cast<double>(r.trials) * static_cast<double>(point.n);
  r.mean_ser = static_cast<double>(r.state_errors) / samples;
  r.std_err = ser_std_err(r.mean_ser, r.trials, point.n);
  r.mean_bp_iters = static_cast<double>(iters) / static_cast<double>(r.trials);
  return r;
}

std::vector<SerCurve> curves_from_rows(const std::vector<PointResult>& rows) {
  std::vector<SerCurve> curves;
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::string>, std::size_t> index;
  for (const auto& row : rows) {
    auto key = std::make_tuple(std::string(to_string(row.spec.algorithm)), row.spec.n, row.spec.k,
                               format_snr(row.spec.snr));
    auto [it, inserted] = index.try_emplace(key, curves.size());
    if (inserted) {
      curves.push_back({std::get<0>(key), row.spec.n, row.spec.k, std::get<3>(key), {}});
    }
    curves[it->second].points.push_back(
        {static_cast<double>(row.spec.m) / static_cast<double>(row.spec.n), row.mean_ser,
         row.trials, row.std_err});
  }
  for (auto& c : curves) {
    std::stable_sort(c.points.begin(), c.points.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.mn_ratio < b.mn_ratio; });
  }
  return curves;
}

std::vector<SerCurve> run_sweep(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  std::map<RowKey, PointResult> existing;
  std::ofstream csv;
  if (!config.out.empty()) {
    const bool have_file = std::filesystem::exists(config.out);
    if (config.resume && have_file) {
      for (auto& row : read_csv_file(config.out)) existing.emplace(key_of(row), row);
      csv.open(config.out, std::ios::app);
    } else {
      if (const auto parent = std::filesystem::path(config.out).parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
      }
      csv.open(config.out, std::ios::trunc);
      csv << kCsvHeader << '\n';
    }
    if (!csv) throw std::runtime_error("run_sweep: cannot write '" + config.out + "'");
  }

  std::vector<PointResult> rows;
  for (std::size_t k : config.k_list) {
    for (const Snr& snr : config.snr_list) {
      for (std::size_t m : config.measurement_counts()) {
        for (Algorithm algo : config.algorithms) {
          const PointSpec point{config.n, k, snr, m, algo};
          PointResult probe;
          probe.spec = point;
          probe.trials = config.trials;
          probe.seed = config.seed;
          if (auto it = existing.find(key_of(probe)); it != existing.end()) {
            rows.push_back(it->second);
            continue;
          }
          const auto start = std::chrono::steady_clock::now();
          rows.push_back(run_point(config, point));
          if (csv.is_open()) {
            write_csv_row(csv, rows.back());
            csv.flush();
            if (!csv) throw std::runtime_error("run_sweep: write to '" + config.out + "' failed");
          }
          if (log) {
            const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
            *log << to_string(algo) << " k=" << k << " snr=" << format_snr(snr) << " m=" << m
                 << " ser=" << format_real(rows.back().mean_ser) << " (" << format_real(took.count())
                 << " s)" << std::endl;
          }
        }
      }
    }
  }
  auto curves = curves_from_rows(rows);
  if (!config.plot_dir.empty()) write_plot_data(config.plot_dir, curves);
  return curves;
}

std::optional<double> cross_point(const SerCurve& curve, double target) {
  const auto& pts = curve.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].mean_ser > target) continue;
    if (i == 0) return pts[0].mn_ratio;
    const CurvePoint& hi = pts[i - 1];  // above target
    const CurvePoint& lo = pts[i];      // at or below target
    double frac;
    if (lo.mean_ser > 0.0) {
      frac = (std::log(hi.mean_ser) - std::log(target)) /
             (std::log(hi.mean_ser) - std::log(lo.mean_ser));
    } else {
      frac = (hi.mean_ser - target) / (hi.mean_ser - lo.mean_ser);
    }
    return hi.mn_ratio + frac * (lo.mn_ratio - hi.mn_ratio);
  }
  return std::nullopt;
}

void write_csv_row(std::ostream& os, const PointResult& r) {
  os << to_string(r.spec.algorithm) << ',' << r.spec.n << ',' << r.spec.k << ','
     << format_snr(r.spec.snr) << ',' << r.spec.m << ','
     << format_real(static_cast<double>(r.spec.m) / static_cast<double>(r.spec.n)) << ','
     << r.trials << ',' << format_real(r.mean_ser) << ',' << format_real(r.std_err) << ','
     << format_real(r.mean_bp_iters) << ',' << r.degenerate_count << ',' << r.seed << '\n';
}

std::vector<PointResult> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  if (line != kCsvHeader) throw ParseError("csv: unexpected header '" + line + "'");
  std::vector<PointResult> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw ParseError("csv: expected 12 fields in '" + line + "'");
    auto num = [&](std::string_view s) {
      std::string buf(s);
      char* end = nullptr;
      const double v = std::strtod(buf.c_str(), &end);
      if (buf.empty() || end != buf.c_str() + buf.size()) throw ParseError("csv: bad number '" + buf + "'");
      return v;
    };
    auto whole = [&](std::string_view s) {
      std::string buf(s);
      char* end = nullptr;
      const unsigned long long v = std::strtoull(buf.c_str(), &end, 10);
      if (buf.empty() || end != buf.c_str() + buf.size()) throw ParseError("csv: bad integer '" + buf + "'");
      return static_cast<std::uint64_t>(v);
    };
    PointResult r;
    r.spec.algorithm = parse_algorithm(f[0]);
    r.spec.n = whole(f[1]);
    r.spec.k = whole(f[2]);
    r.spec.snr = parse_snr(f[3]);
    r.spec.m = whole(f[4]);
    r.trials = whole(f[6]);
    r.mean_ser = num(f[7]);
    r.std_err = num(f[8]);
    r.mean_bp_iters = num(f[9]);
    r.degenerate_count = whole(f[10]);
    r.seed = whole(f[11]);
    r.state_errors = static_cast<std::size_t>(
        std::llround(r.mean_ser * static_cast<double>(r.trials) * static_cast<double>(r.spec.n)));
    rows.push_back(r);
  }
  return rows;
}

std::vector<PointResult> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open '" + path + "'");
  return read_csv(in);
}

void write_plot_data(const std::string& dir, const std::vector<SerCurve>& curves) {
  std::filesystem::create_directories(dir);
  for (const auto& c : curves) {
    const std::string name = c.algorithm + "_n" + std::to_string(c.n) + "_k" + std::to_string(c.k) +
                             "_snr" + c.snr + ".dat";
    std::ofstream out(std::filesystem::path(dir) / name);
    for (const auto& p : c.points) out << format_real(p.mn_ratio) << ' ' << format_real(p.mean_ser) << '\n';
    if (!out) throw std::runtime_error("write_plot_data: cannot write '" + name + "'");
  }
}

}  // namespace bhtbp
