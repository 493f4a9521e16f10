#include "bhtbp/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <string>

#include "bhtbp/errors.hpp"

namespace bhtbp {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ParseError("config: bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view v) {
  std::string buf(v);
  char* end = nullptr;
  const double d = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) bad_value(key, v);
  return d;
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::string buf(v);
  char* end = nullptr;
  const unsigned long long u = std::strtoull(buf.c_str(), &end, 10);
  if (buf.empty() || buf[0] == '-' || end != buf.c_str() + buf.size()) bad_value(key, v);
  return static_cast<std::size_t>(u);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v);
}

// "start:stop:step", inclusive of stop up to rounding
std::vector<double> expand_range(std::string_view key, std::string_view v) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = v.find(':', pos);
    parts.push_back(to_double(key, trim(v.substr(pos, colon - pos))));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) bad_value(key, v);
  const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return out;
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  if (key == "n") {
    c.n = to_size(key, value);
  } else if (key == "k") {
    c.k_list.clear();
    for (auto v : split_list(value)) c.k_list.push_back(to_size(key, v));
  } else if (key == "snr_db") {
    c.snr_list.clear();
    for (auto v : split_list(value)) {
      try {
        c.snr_list.push_back(parse_snr(v));
      } catch (const ParseError&) {
        bad_value(key, v);
      }
    }
  } else if (key == "mn_ratios") {
    c.mn_ratios.clear();
    for (auto v : split_list(value)) {
      if (v.find(':') != std::string_view::npos) {
        for (double r : expand_range(key, v)) c.mn_ratios.push_back(r);
      } else {
        c.mn_ratios.push_back(to_double(key, v));
      }
    }
  } else if (key == "trials") {
    c.trials = to_size(key, value);
  } else if (key == "seed") {
    c.seed = to_size(key, value);
  } else if (key == "algorithms") {
    c.algorithms.clear();
    for (auto v : split_list(value)) c.algorithms.push_back(parse_algorithm(v));
  } else if (key == "col_weight") {
    c.col_weight = to_size(key, value);
  } else if (key == "slab_std") {
    c.slab_std = to_double(key, value);
  } else if (key == "mag_lo_ratio") {
    c.mag_lo_ratio = to_double(key, value);
  } else if (key == "mag_hi_ratio") {
    c.mag_hi_ratio = to_double(key, value);
  } else if (key == "snr_mode") {
    if (value == "realized") {
      c.snr_ensemble = false;
    } else if (value == "ensemble") {
      c.snr_ensemble = true;
    } else {
      bad_value(key, value);
    }
  } else if (key == "avoid_4cycles") {
    c.avoid_4cycles = to_bool(key, value);
  } else if (key == "baseline_matrix") {
    if (value == "gaussian") {
      c.baselines_on_sparse = false;
    } else if (value == "sparse") {
      c.baselines_on_sparse = true;
    } else {
      bad_value(key, value);
    }
  } else if (key == "bp.max_iters") {
    c.bp.max_iters = to_size(key, value);
  } else if (key == "bp.damping") {
    c.bp.damping = to_double(key, value);
  } else if (key == "bp.tol") {
    c.bp.convergence_tol = to_double(key, value);
  } else if (key == "bp.grid_points") {
    c.bp.grid_points = to_size(key, value);
  } else if (key == "bp.grid_sigmas") {
    c.bp.grid_half_range_sigmas = to_double(key, value);
  } else if (key == "bp.noise_sigmas") {
    c.bp.noise_half_width_sigmas = to_double(key, value);
  } else if (key == "lasso.lambda") {
    if (value == "auto") {
      c.lasso.lambda.reset();
    } else {
      c.lasso.lambda = to_double(key, value);
    }
  } else if (key == "lasso.max_iters") {
    c.lasso.max_iters = to_size(key, value);
  } else if (key == "lasso.tol") {
    c.lasso.tol = to_double(key, value);
  } else if (key == "out") {
    c.out = std::string(value);
  } else if (key == "plot_dir") {
    c.plot_dir = std::string(value);
  } else if (key == "dump_dir") {
    c.dump_dir = std::string(value);
  } else if (key == "resume") {
    c.resume = to_bool(key, value);
  } else if (key == "threads") {
    c.threads = to_size(key, value);
  } else {
    throw ParseError("config: unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(c, trim(v.substr(0, eq)), trim(v.substr(eq + 1)));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  return parse_config(in);
}

std::string config_reference() {
  return R"(# key = value; lists comma separated; '#' starts a comment
n = 128                    # signal length
k = 12                     # list of sparsity levels
snr_db = 10,20,30,50       # list; 'inf' = noiseless
mn_ratios = 0.25:1.0:0.05  # list of M/N values and/or start:stop:step ranges
trials = 300               # Monte-Carlo trials per point
seed = 1                   # master seed
algorithms = bht-bp,omp,lasso   # also: bht-bp-k (k smallest log ratios)
col_weight = 3             # L, nonzeros per column of the sparse matrix
slab_std = 10              # sigma_x
mag_lo_ratio = 0.2         # |x_i| >= mag_lo_ratio * sigma_x
mag_hi_ratio = 3           # |x_i| <= mag_hi_ratio * sigma_x
snr_mode = realized        # realized | ensemble
avoid_4cycles = false      # redraw columns that close a 4-cycle
baseline_matrix = gaussian # gaussian | sparse (ablation)
bp.max_iters = 10
bp.damping = 0
bp.tol = 1e-6              # early stop on max edge total-variation change
bp.grid_points = 513
bp.grid_sigmas = 4         # x-grid half-range in units of sigma_x
bp.noise_sigmas = 8        # noise density half-width in units of sigma_n
lasso.lambda = auto        # auto = sigma_n sqrt(2 ln n)
lasso.max_iters = 1000
lasso.tol = 1e-7
out =                      # CSV output path
plot_dir =                 # per-curve "x y" files
dump_dir =                 # failure-case instance dumps
resume = true
threads = 0                # 0 = all hardware threads
)";
}

}  // namespace bhtbp
