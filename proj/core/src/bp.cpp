#include "bhtbp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>

#include "bhtbp/errors.hpp"
#include "bhtbp/fft.hpp"

namespace bhtbp {

namespace {

using fft::Complex;

void track_normalization(double total, BpDiagnostics& diag) {
  diag.max_normalization_error = std::max(diag.max_normalization_error, std::abs(total - 1.0));
}

SpikedDensity prior_spike_fallback(const SpikedDensity& prior) {
  SpikedDensity out;
  out.spike = prior.spike;
  out.cont = uniform_on_grid(prior.cont.grid);
  for (double& m : out.cont.mass) m *= std::max(0.0, 1.0 - prior.spike);
  return normalize(std::move(out));
}

SpikedDensity blend(const SpikedDensity& fresh, const SpikedDensity& old, double damping) {
  if (damping <= 0.0) return fresh;
  SpikedDensity out = fresh;
  out.spike = (1.0 - damping) * fresh.spike + damping * old.spike;
  for (std::size_t i = 0; i < out.cont.mass.size(); ++i) {
    out.cont.mass[i] = (1.0 - damping) * fresh.cont.mass[i] + damping * old.cont.mass[i];
  }
  return normalize(std::move(out));
}

SpikedDensity product_excluding(const FactorGraph& graph, const MessageStore& store,
                                std::uint32_t var, const SpikedDensity& prior,
                                std::int64_t skip_edge, std::size_t* degenerate) {
  std::vector<const ContinuousDensity*> factors;
  factors.reserve(graph.var_edges[var].size());
  for (std::uint32_t e : graph.var_edges[var]) {
    if (static_cast<std::int64_t>(e) != skip_edge) factors.push_back(&store.b[e]);
  }
  try {
    return product_spiked(prior, factors);
  } catch (const DegenerateMessage&) {
    if (degenerate) ++*degenerate;
    return prior_spike_fallback(prior);
  }
}

// Mass vector of an a-message as seen by the factor: spike folded into the
// zero bin, reversed when the edge carries a -1.
void oriented_mass(const SpikedDensity& a, int sign, std::vector<double>& out) {
  const std::size_t g = a.cont.mass.size();
  out.resize(g);
  if (sign > 0) {
    std::copy(a.cont.mass.begin(), a.cont.mass.end(), out.begin());
  } else {
    std::reverse_copy(a.cont.mass.begin(), a.cont.mass.end(), out.begin());
  }
  out[a.cont.grid.center()] += a.spike;
}

class Decoder {
 public:
  Decoder(const FactorGraph& graph, const SpikedDensity& prior, const BpConfig& config)
      : graph_(graph),
        prior_(prior),
        config_(config),
        x_grid_(prior.cont.grid),
        store_(init_messages(graph, prior)),
        next_b_(store_.b),
        noise_(noise_density(graph.noise_std, x_grid_.spacing(), config.noise_half_width_sigmas)) {}

  BpResult run() {
    BpResult result;
    BpDiagnostics& diag = result.diagnostics;
    for (std::size_t iter = 1; iter <= config_.max_iters; ++iter) {
      for (std::uint32_t j = 0; j < graph_.num_factors(); ++j) update_factor(j, diag);

      double residual = 0.0;
      for (std::size_t e = 0; e < next_b_.size(); ++e) {
        residual = std::max(residual, total_variation(next_b_[e], store_.b[e]));
      }
      std::swap(store_.b, next_b_);
      diag.iterations = iter;

      // unchanged b's imply unchanged a's, so the b residual decides convergence
      if (residual < config_.convergence_tol) {
        diag.max_residual = residual;
        diag.converged = true;
        break;
      }
      if (iter < config_.max_iters) {
        std::vector<SpikedDensity> next_a(store_.a.size());
        for (std::uint32_t e = 0; e < graph_.edges.size(); ++e) {
          next_a[e] = variable_update(graph_, store_, e, prior_, config_.damping,
                                      &diag.degenerate_count);
          track_normalization(next_a[e].total(), diag);
          residual = std::max(residual, total_variation(next_a[e], store_.a[e]));
        }
        store_.a = std::move(next_a);
      }
      diag.max_residual = residual;
    }

    result.posteriors.reserve(graph_.num_vars());
    for (std::uint32_t i = 0; i < graph_.num_vars(); ++i) {
      result.posteriors.push_back(posterior(graph_, store_, i, prior_, &diag.degenerate_count));
      track_normalization(result.posteriors.back().total(), diag);
    }
    return result;
  }

 private:
  // Carries the 1/size inverse-transform factor.
  const fft::AlignedVector<Complex>& noise_spectrum(std::size_t size) {
    auto& spec = noise_spectra_[size];
    if (spec.empty()) {
      auto& tf = fft::RealTransform::get(size);
      spec.resize(tf.spectrum_size());
      tf.forward(noise_.mass, spec);
      const double scale = 1.0 / static_cast<double>(size);
      for (auto& c : spec) c *= scale;
    }
    return spec;
  }

  void store_b(std::uint32_t e, const ContinuousDensity& zdens, BpDiagnostics& diag) {
    const auto& edge = graph_.edges[e];
    ShiftedRead r = read_shifted(zdens, graph_.z[edge.factor], edge.sign, x_grid_);
    finish_b(e, r, diag);
  }

  void finish_b(std::uint32_t e, ShiftedRead& r, BpDiagnostics& diag) {
    if (r.degenerate) {
      ++diag.degenerate_count;
      r.likelihood = uniform_on_grid(x_grid_);
    }
    track_normalization(r.likelihood.total(), diag);
    next_b_[e] = std::move(r.likelihood);
  }

  // Same interpolation as read_shifted, but on a circular buffer holding the
  // z-density whose linear index p lives at slot p mod size. Only indices in
  // [0, len) carry mass.
  ShiftedRead read_circular(std::span<const double> buf, std::size_t len, std::size_t zhalf,
                            double z, int sign) const {
    const double step = x_grid_.spacing();
    const auto size = static_cast<std::ptrdiff_t>(buf.size());
    const auto last = static_cast<std::ptrdiff_t>(len) - 1;
    auto at = [&](std::ptrdiff_t idx) {
      if (idx < 0 || idx > last) return kMassFloor;
      return std::max(buf[static_cast<std::size_t>(idx % size)], 0.0);
    };
    const double base = z / step + static_cast<double>(zhalf);
    const double lower = std::floor(base);
    const double frac = base - lower;
    const auto base_idx = static_cast<std::ptrdiff_t>(lower);
    const auto center = static_cast<std::ptrdiff_t>(x_grid_.center());

    ShiftedRead r{ContinuousDensity(x_grid_), true};
    for (std::size_t i = 0; i < x_grid_.points(); ++i) {
      const std::ptrdiff_t idx = base_idx - sign * (static_cast<std::ptrdiff_t>(i) - center);
      const double v = (1.0 - frac) * at(idx) + frac * at(idx + 1);
      if (v > kMassFloor) r.degenerate = false;
      r.likelihood.mass[i] = std::max(v, kMassFloor);
    }
    r.likelihood = normalize(std::move(r.likelihood));
    return r;
  }

  // All outgoing b-messages of factor j via prefix/suffix products of the
  // incoming spectra: edge t sees noise * prod_{s != t} a_s.
  //
  // The reads only touch linear indices within `reach` of zhalf, so a
  // circular transform of size > zhalf + reach is alias-free there.
  void update_factor(std::uint32_t j, BpDiagnostics& diag) {
    const auto& edges = graph_.factor_edges[j];
    const std::size_t d = edges.size();
    if (d == 0) return;
    if (d == 1) {
      store_b(edges[0], noise_, diag);
      return;
    }
    const double z = graph_.z[j];
    const std::size_t zhalf = (d - 1) * x_grid_.half_bins() + noise_.grid.half_bins();
    const std::size_t len = 2 * zhalf + 1;
    const auto z_bins = static_cast<std::size_t>(std::ceil(std::abs(z) / x_grid_.spacing()));
    const std::size_t reach = std::min(zhalf, x_grid_.half_bins() + z_bins + 2);
    auto& tf = fft::RealTransform::get(fft::good_size(std::max(zhalf + reach + 1, noise_.mass.size())));
    const std::size_t bins = tf.spectrum_size();
    const std::size_t stride = (bins + 3) / 4 * 4;  // keeps every row 64-byte aligned
    const auto& noise_spec = noise_spectrum(tf.size());
    auto row = [stride](fft::AlignedVector<Complex>& v, std::size_t t) { return &v[t * stride]; };

    ensure_size(spectra_, d * stride);
    ensure_size(prefix_, (d + 1) * stride);
    ensure_size(suffix_, (d + 1) * stride);
    for (std::size_t t = 0; t < d; ++t) {
      const auto e = edges[t];
      oriented_mass(store_.a[e], graph_.edges[e].sign, scratch_);
      tf.forward(scratch_, {row(spectra_, t), bins});
    }
    std::copy(noise_spec.begin(), noise_spec.end(), row(prefix_, 0));
    for (std::size_t t = 0; t < d; ++t) {
      multiply(row(prefix_, t), row(spectra_, t), row(prefix_, t + 1), bins);
    }
    std::copy_n(row(spectra_, d - 1), bins, row(suffix_, d - 1));
    for (std::size_t t = d - 1; t-- > 0;) {
      multiply(row(suffix_, t + 1), row(spectra_, t), row(suffix_, t), bins);
    }

    ensure_size(product_, stride);
    ensure_size(zbuf_, tf.size());
    for (std::size_t t = 0; t < d; ++t) {
      // the last edge's product is prefix row d-1, which is not read again
      Complex* src = row(prefix_, t);
      if (t + 1 < d) {
        multiply(row(prefix_, t), row(suffix_, t + 1), product_.data(), bins);
        src = product_.data();
      }
      const std::span<double> zmass(zbuf_.data(), tf.size());
      tf.inverse_unscaled({src, bins}, zmass);
      ShiftedRead r = read_circular(zmass, len, zhalf, z, graph_.edges[edges[t]].sign);
      finish_b(edges[t], r, diag);
    }
  }

  // out = a * b elementwise on interleaved (re, im) pairs; spelled out to
  // skip the inf/nan recovery of std::complex multiplication
  __attribute__((target_clones("avx2", "default"))) static void multiply(
      const Complex* a, const Complex* b, Complex* out, std::size_t count) {
    const double* __restrict x = reinterpret_cast<const double*>(a);
    const double* __restrict y = reinterpret_cast<const double*>(b);
    double* __restrict o = reinterpret_cast<double*>(out);
    for (std::size_t k = 0; k < 2 * count; k += 2) {
      const double re = x[k] * y[k] - x[k + 1] * y[k + 1];
      const double im = x[k] * y[k + 1] + x[k + 1] * y[k];
      o[k] = re;
      o[k + 1] = im;
    }
  }

  template <class V>
  static void ensure_size(V& v, std::size_t n) {
    if (v.size() < n) v.resize(n);
  }

  const FactorGraph& graph_;
  const SpikedDensity& prior_;
  const BpConfig& config_;
  Grid x_grid_;
  MessageStore store_;
  std::vector<ContinuousDensity> next_b_;
  ContinuousDensity noise_;
  std::map<std::size_t, fft::AlignedVector<Complex>> noise_spectra_;

  std::vector<double> scratch_;
  fft::AlignedVector<double> zbuf_;
  fft::AlignedVector<Complex> spectra_, prefix_, suffix_, product_;
};

}  // namespace

void BpConfig::validate() const {
  if (max_iters < 1) throw InvalidSpec("BpConfig: max_iters must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0)) throw InvalidSpec("BpConfig: damping must lie in [0, 1)");
  if (!(convergence_tol >= 0.0)) throw InvalidSpec("BpConfig: convergence_tol must be >= 0");
  if (grid_points < 3 || grid_points % 2 == 0) throw InvalidSpec("BpConfig: grid_points must be odd and >= 3");
  if (!(grid_half_range_sigmas > 0.0)) throw InvalidSpec("BpConfig: grid_half_range_sigmas must be positive");
  if (!(noise_half_width_sigmas > 0.0)) throw InvalidSpec("BpConfig: noise_half_width_sigmas must be positive");
}

Grid BpConfig::x_grid(double slab_std) const {
  return Grid::symmetric(grid_half_range_sigmas * slab_std, grid_points);
}

FactorGraph build_graph(const SparseBernoulliMatrix& matrix, const Measurement& meas) {
  if (meas.z.size() != matrix.rows()) {
    throw DimensionMismatch("build_graph: z has " + std::to_string(meas.z.size()) +
                            " entries, matrix has " + std::to_string(matrix.rows()) + " rows");
  }
  if (!(meas.noise_std >= 0.0)) throw InvalidSpec("build_graph: noise_std must be >= 0");
  FactorGraph g;
  g.var_edges.resize(matrix.cols());
  g.factor_edges.resize(matrix.rows());
  g.edges.reserve(matrix.edge_count());
  for (std::uint32_t i = 0; i < matrix.cols(); ++i) {
    for (const auto& entry : matrix.column(i)) {
      const auto e = static_cast<std::uint32_t>(g.edges.size());
      g.edges.push_back({i, entry.index, entry.sign});
      g.var_edges[i].push_back(e);
      g.factor_edges[entry.index].push_back(e);
    }
  }
  g.z = meas.z;
  g.noise_std = meas.noise_std;
  return g;
}

MessageStore init_messages(const FactorGraph& graph, const SpikedDensity& prior) {
  MessageStore s;
  s.a.assign(graph.edges.size(), prior);
  s.b.assign(graph.edges.size(), uniform_on_grid(prior.cont.grid));
  return s;
}

ContinuousDensity noise_density(double noise_std, double spacing, double half_width_sigmas) {
  if (noise_std == 0.0) return unit_mass(Grid::with_spacing(spacing, 0));
  const auto half = static_cast<std::size_t>(std::ceil(half_width_sigmas * noise_std / spacing));
  return gaussian_on_grid(noise_std, Grid::with_spacing(spacing, std::max<std::size_t>(half, 1)));
}

ContinuousDensity factor_update(const FactorGraph& graph, const MessageStore& store,
                                std::uint32_t edge, const BpConfig& config,
                                std::size_t* degenerate) {
  const auto& target = graph.edges.at(edge);
  const Grid& x_grid = store.b.at(edge).grid;
  ContinuousDensity zdens =
      noise_density(graph.noise_std, x_grid.spacing(), config.noise_half_width_sigmas);
  for (std::uint32_t e : graph.factor_edges[target.factor]) {
    if (e == edge) continue;
    const SpikedDensity& a = store.a[e];
    zdens = convolve(zdens, flatten(graph.edges[e].sign < 0 ? reflect(a) : a));
  }
  ShiftedRead r = read_shifted(zdens, graph.z[target.factor], target.sign, x_grid);
  if (r.degenerate) {
    if (degenerate) ++*degenerate;
    return uniform_on_grid(x_grid);
  }
  return std::move(r.likelihood);
}

SpikedDensity variable_update(const FactorGraph& graph, const MessageStore& store,
                              std::uint32_t edge, const SpikedDensity& prior, double damping,
                              std::size_t* degenerate) {
  const auto var = graph.edges.at(edge).var;
  SpikedDensity fresh = product_excluding(graph, store, var, prior, edge, degenerate);
  return blend(fresh, store.a[edge], damping);
}

SpikedDensity posterior(const FactorGraph& graph, const MessageStore& store, std::uint32_t var,
                        const SpikedDensity& prior, std::size_t* degenerate) {
  return product_excluding(graph, store, var, prior, -1, degenerate);
}

SpikedDensity make_prior(double q, double slab_std, const BpConfig& config) {
  return spike_and_slab(q, slab_std, config.x_grid(slab_std));
}

BpResult run(const FactorGraph& graph, const SpikedDensity& prior, const BpConfig& config) {
  config.validate();
  if (std::abs(prior.total() - 1.0) > 1e-9) throw InvalidSpec("bp::run: prior must be normalized");
  Decoder decoder(graph, prior, config);
  return decoder.run();
}

BpResult run(const SparseBernoulliMatrix& matrix, const Measurement& meas,
             const SpikedDensity& prior, const BpConfig& config) {
  return run(build_graph(matrix, meas), prior, config);
}

}  // namespace bhtbp
