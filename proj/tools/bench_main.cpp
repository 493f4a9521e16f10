// bench: Monte-Carlo SER sweeps for BHT-BP, OMP and Lasso.
//
//   bench run --config sweep.cfg [--seed N] [--trials N] [--out results.csv]
//   bench cross --csv results.csv [--target 0.0078125]
//   bench replay --instance dump.txt
//   bench schema

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "bhtbp/bench.hpp"
#include "bhtbp/bp.hpp"
#include "bhtbp/config.hpp"
#include "bhtbp/detector.hpp"
#include "bhtbp/instance_io.hpp"
#include "bhtbp/oracle.hpp"

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> trials, std::optional<std::string> out,
            std::optional<std::size_t> threads, bool quiet) {
  bhtbp::ExperimentConfig config = bhtbp::load_config(config_path);
  if (seed) config.seed = *seed;
  if (trials) config.trials = *trials;
  if (out) config.out = *out;
  if (threads) config.threads = *threads;
  const auto curves = bhtbp::run_sweep(config, quiet ? nullptr : &std::cerr);
  if (config.out.empty()) {
    std::cout << "algorithm,n,k,snr_db,mn_ratio,trials,mean_ser,std_err\n";
    for (const auto& c : curves) {
      for (const auto& p : c.points) {
        std::printf("%s,%zu,%zu,%s,%.10g,%zu,%.10g,%.10g\n", c.algorithm.c_str(), c.n, c.k,
                    c.snr.c_str(), p.mn_ratio, p.trials, p.mean_ser, p.std_err);
      }
    }
  }
  return 0;
}

int cmd_cross(const std::string& csv, std::optional<double> target) {
  const auto curves = bhtbp::curves_from_rows(bhtbp::read_csv_file(csv));
  std::cout << "algorithm,n,k,snr_db,target,cross_mn\n";
  for (const auto& c : curves) {
    const double t = target.value_or(1.0 / static_cast<double>(c.n));
    const auto cp = bhtbp::cross_point(c, t);
    std::printf("%s,%zu,%zu,%s,%.6g,%s\n", c.algorithm.c_str(), c.n, c.k, c.snr.c_str(), t,
                cp ? std::to_string(*cp).c_str() : "-");
  }
  return 0;
}

int cmd_replay(const std::string& path, std::optional<double> q_override, double slab_std,
               std::size_t grid_points) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const bhtbp::Instance inst = bhtbp::read_instance(in);
  if (!inst.measurement) throw std::runtime_error("instance has no measurement record");
  const std::size_t n = inst.matrix.cols();
  double q = q_override.value_or(0.0);
  if (!q_override) {
    if (!inst.signal) throw std::runtime_error("instance has no signal; pass --q");
    q = static_cast<double>(inst.signal->support.popcount()) / static_cast<double>(n);
  }
  bhtbp::BpConfig cfg;
  cfg.grid_points = grid_points;
  const auto prior = bhtbp::make_prior(q, slab_std, cfg);
  const auto res = bhtbp::run(inst.matrix, *inst.measurement, prior, cfg);
  const auto det = bhtbp::detect_support(res.posteriors, prior);
  std::cout << "iterations " << res.diagnostics.iterations << "\nresidual "
            << res.diagnostics.max_residual << "\ndegenerate " << res.diagnostics.degenerate_count
            << "\nsupport ";
  for (auto b : det.support.bits) std::cout << int{b};
  std::cout << "\nlog_ratios";
  for (double lr : det.log_ratios) std::cout << ' ' << lr;
  std::cout << '\n';
  if (inst.signal) std::cout << "ser " << bhtbp::ser(det.support, inst.signal->support) << '\n';
  return 0;
}

// Compares BP + detector against exhaustive enumeration on random trees.
int cmd_oracle_check(std::size_t n, std::size_t m, std::size_t instances, std::uint64_t seed,
                     double q, double slab_std, double noise_std, std::size_t grid_points) {
  bhtbp::Rng rng(seed);
  bhtbp::BpConfig cfg;
  cfg.grid_points = grid_points;
  cfg.max_iters = 2 * (n + m);
  const auto prior = bhtbp::make_prior(q, slab_std, cfg);
  double worst = 0.0;
  std::size_t disagreements = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    const auto phi = bhtbp::random_tree_matrix(n, m, rng);
    bhtbp::SignalSpec spec{n, 0, slab_std, 0.0, 4.0};
    spec.k = std::min<std::size_t>(n, static_cast<std::size_t>(std::lround(q * static_cast<double>(n))));
    const auto signal = bhtbp::gen_signal(spec, rng);
    bhtbp::Measurement meas;
    meas.noise_std = noise_std;
    meas.z = phi.apply(signal.values);
    std::normal_distribution<double> noise(0.0, noise_std);
    for (double& v : meas.z) v += noise(rng);

    const auto exact = bhtbp::exact_support_posterior(phi, meas.z, q, slab_std, noise_std);
    const auto res = bhtbp::run(phi, meas, prior, cfg);
    const auto det = bhtbp::detect_support(res.posteriors, prior);
    for (std::size_t i = 0; i < n; ++i) {
      const double bp_active = 1.0 - res.posteriors[i].spike;
      worst = std::max(worst, std::abs(bp_active - exact[i]));
      if (det.support.bits[i] != (exact[i] > 0.5 ? 1 : 0)) ++disagreements;
    }
  }
  std::cout << "instances " << instances << "\nmax_spike_tv " << worst << "\ndecision_disagreements "
            << disagreements << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo support-recovery benchmark (BHT-BP, OMP, Lasso)"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an SER sweep described by a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials, threads;
  std::optional<std::string> out;
  bool quiet = false;
  run->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--trials", trials, "Override trials per point");
  run->add_option("--out", out, "Override the CSV output path");
  run->add_option("--threads", threads, "Worker threads (0 = all)");
  run->add_flag("--quiet", quiet, "No per-point progress on stderr");

  auto* cross = app.add_subcommand("cross", "Cross points of every curve in a results CSV");
  std::string csv;
  std::optional<double> target;
  cross->add_option("--csv", csv, "Results CSV")->required()->check(CLI::ExistingFile);
  cross->add_option("--target", target, "Target SER (default 1/n)");

  auto* replay = app.add_subcommand("replay", "Decode a dumped instance with BHT-BP");
  std::string instance;
  std::optional<double> q;
  double slab_std = 10.0;
  std::size_t grid_points = 513;
  replay->add_option("--instance", instance, "Instance file")->required()->check(CLI::ExistingFile);
  replay->add_option("--q", q, "Sparsity rate (default: from the stored signal)");
  replay->add_option("--slab-std", slab_std, "Prior slab standard deviation");
  replay->add_option("--grid-points", grid_points, "x-grid points");

  app.add_subcommand("schema", "Print the config file schema with defaults");

  // debug only; not listed in --help
  auto* oracle = app.add_subcommand("oracle-check", "")->group("");
  std::size_t on = 6, om = 5, oinst = 20;
  std::uint64_t oseed = 1;
  double oq = 0.3, onoise = 1.0, oslab = 10.0;
  oracle->add_option("--n", on)->check(CLI::Range(1, 16));
  oracle->add_option("--m", om);
  oracle->add_option("--instances", oinst);
  oracle->add_option("--seed", oseed);
  oracle->add_option("--q", oq);
  oracle->add_option("--noise-std", onoise);
  oracle->add_option("--slab-std", oslab);
  std::size_t ogrid = 513;
  oracle->add_option("--grid-points", ogrid);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, trials, out, threads, quiet);
    if (*cross) return cmd_cross(csv, target);
    if (*replay) return cmd_replay(instance, q, slab_std, grid_points);
    if (app.got_subcommand("schema")) {
      std::cout << bhtbp::config_reference();
      return 0;
    }
    if (*oracle) return cmd_oracle_check(on, om, oinst, oseed, oq, oslab, onoise, ogrid);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
