#include "bhtbp/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "bhtbp/errors.hpp"
#include "bhtbp/fft.hpp"

namespace bhtbp {

namespace {

// Upper tail of N(0, std^2).
double upper_tail(double t, double std) { return 0.5 * std::erfc(t / (std * M_SQRT2)); }

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw DimensionMismatch(std::string(where) + ": grid mismatch");
}

void require_same_spacing(const Grid& a, const Grid& b, const char* where) {
  if (!a.same_spacing(b)) throw DimensionMismatch(std::string(where) + ": spacing mismatch");
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

Grid Grid::symmetric(double half_range, std::size_t points) {
  if (!(half_range > 0.0)) throw InvalidSpec("Grid: half_range must be positive");
  if (points < 3 || points % 2 == 0) throw InvalidSpec("Grid: points must be odd and >= 3");
  const std::size_t h = (points - 1) / 2;
  return Grid(half_range / static_cast<double>(h), h);
}

Grid Grid::with_spacing(double spacing, std::size_t half_bins) {
  if (!(spacing > 0.0)) throw InvalidSpec("Grid: spacing must be positive");
  return Grid(spacing, half_bins);
}

bool Grid::same_spacing(const Grid& other) const {
  return std::abs(spacing_ - other.spacing_) <= 1e-12 * std::max(spacing_, other.spacing_);
}

ContinuousDensity::ContinuousDensity(const Grid& g, std::vector<double> m)
    : grid(g), mass(std::move(m)) {
  if (mass.size() != grid.points()) throw DimensionMismatch("ContinuousDensity: mass length != grid points");
}

double ContinuousDensity::total() const { return sum(mass); }

ContinuousDensity gaussian_on_grid(double std, const Grid& grid) {
  if (!(std > 0.0)) throw std::invalid_argument("gaussian_on_grid: std must be positive");
  ContinuousDensity d(grid);
  const double half = 0.5 * grid.spacing();
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double lo = grid.x(i) - half;
    const double hi = grid.x(i) + half;
    // evaluate each bin on the tail side to avoid cancellation
    if (lo >= 0.0) {
      d.mass[i] = upper_tail(lo, std) - upper_tail(hi, std);
    } else if (hi <= 0.0) {
      d.mass[i] = upper_tail(-hi, std) - upper_tail(-lo, std);
    } else {
      d.mass[i] = 1.0 - upper_tail(hi, std) - upper_tail(-lo, std);
    }
  }
  return normalize(std::move(d));
}

ContinuousDensity uniform_on_grid(const Grid& grid) {
  ContinuousDensity d(grid);
  std::fill(d.mass.begin(), d.mass.end(), 1.0 / static_cast<double>(grid.points()));
  return d;
}

ContinuousDensity unit_mass(const Grid& grid) {
  ContinuousDensity d(grid);
  d.mass[grid.center()] = 1.0;
  return d;
}

SpikedDensity spike_and_slab(double q, double slab_std, const Grid& grid) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidSpec("spike_and_slab: q must lie in [0, 1]");
  SpikedDensity d;
  d.spike = 1.0 - q;
  d.cont = gaussian_on_grid(slab_std, grid);
  for (double& m : d.cont.mass) m *= q;
  return d;
}

ContinuousDensity normalize(ContinuousDensity d) {
  const double t = d.total();
  if (!(t > kNormalizeFloor)) throw DegenerateMessage("normalize: total mass below floor");
  for (double& m : d.mass) m /= t;
  return d;
}

SpikedDensity normalize(SpikedDensity d) {
  const double t = d.total();
  if (!(t > kNormalizeFloor)) throw DegenerateMessage("normalize: total mass below floor");
  d.spike /= t;
  for (double& m : d.cont.mass) m /= t;
  return d;
}

SpikedDensity product_spiked(const SpikedDensity& base,
                             std::span<const ContinuousDensity* const> factors) {
  SpikedDensity out = base;
  const std::size_t c = base.cont.grid.center();
  for (const ContinuousDensity* f : factors) {
    require_same_grid(base.cont.grid, f->grid, "product_spiked");
    out.spike *= std::max(f->mass[c], kMassFloor);
    for (std::size_t i = 0; i < out.cont.mass.size(); ++i) {
      out.cont.mass[i] *= std::max(f->mass[i], kMassFloor);
    }
  }
  return normalize(std::move(out));
}

SpikedDensity product_spiked(const SpikedDensity& base,
                             const std::vector<ContinuousDensity>& factors) {
  std::vector<const ContinuousDensity*> ptrs;
  ptrs.reserve(factors.size());
  for (const auto& f : factors) ptrs.push_back(&f);
  return product_spiked(base, ptrs);
}

ContinuousDensity convolve(const ContinuousDensity& a, const ContinuousDensity& b) {
  require_same_spacing(a.grid, b.grid, "convolve");
  const Grid out_grid =
      Grid::with_spacing(a.grid.spacing(), a.grid.half_bins() + b.grid.half_bins());
  std::vector<double> m = fft::linear_convolve(a.mass, b.mass);
  for (double& v : m) v = std::max(v, 0.0);
  return normalize(ContinuousDensity(out_grid, std::move(m)));
}

ContinuousDensity convolve_spiked(const SpikedDensity& a, const ContinuousDensity& b) {
  return convolve(flatten(a), b);
}

ContinuousDensity reflect(ContinuousDensity d) {
  std::reverse(d.mass.begin(), d.mass.end());
  return d;
}

SpikedDensity reflect(SpikedDensity d) {
  std::reverse(d.cont.mass.begin(), d.cont.mass.end());
  return d;
}

ContinuousDensity flatten(const SpikedDensity& d) {
  ContinuousDensity out = d.cont;
  out.mass[out.grid.center()] += d.spike;
  return out;
}

ShiftedRead read_shifted(const ContinuousDensity& d, double z, int sign, const Grid& out_grid) {
  require_same_spacing(d.grid, out_grid, "evaluate_shifted");
  if (sign != 1 && sign != -1) throw std::invalid_argument("evaluate_shifted: sign must be +-1");
  const double step = d.grid.spacing();
  const auto last = static_cast<std::ptrdiff_t>(d.grid.points()) - 1;
  auto at = [&](std::ptrdiff_t idx) {
    return (idx < 0 || idx > last) ? kMassFloor : d.mass[static_cast<std::size_t>(idx)];
  };

  // fractional index of z - sign * x_i in d's grid; integer steps in i
  const double base = z / step + static_cast<double>(d.grid.half_bins());
  const double lower = std::floor(base);
  const double frac = base - lower;
  const auto base_idx = static_cast<std::ptrdiff_t>(lower);
  const auto out_center = static_cast<std::ptrdiff_t>(out_grid.center());

  ShiftedRead r{ContinuousDensity(out_grid), true};
  for (std::size_t i = 0; i < out_grid.points(); ++i) {
    const std::ptrdiff_t idx = base_idx - sign * (static_cast<std::ptrdiff_t>(i) - out_center);
    const double v = (1.0 - frac) * at(idx) + frac * at(idx + 1);
    if (v > kMassFloor) r.degenerate = false;
    r.likelihood.mass[i] = std::max(v, kMassFloor);
  }
  r.likelihood = normalize(std::move(r.likelihood));
  return r;
}

ContinuousDensity evaluate_shifted(const ContinuousDensity& d, double z, int sign,
                                   const Grid& out_grid) {
  return read_shifted(d, z, sign, out_grid).likelihood;
}

double total_variation(const ContinuousDensity& a, const ContinuousDensity& b) {
  require_same_grid(a.grid, b.grid, "total_variation");
  double s = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) s += std::abs(a.mass[i] - b.mass[i]);
  return 0.5 * s;
}

double total_variation(const SpikedDensity& a, const SpikedDensity& b) {
  return total_variation(a.cont, b.cont) + 0.5 * std::abs(a.spike - b.spike);
}

void write_density(std::ostream& os, const ContinuousDensity& d) {
  for (std::size_t i = 0; i < d.mass.size(); ++i) os << d.grid.x(i) << ' ' << d.mass[i] << '\n';
}

void write_density(std::ostream& os, const SpikedDensity& d) {
  os << "# spike " << d.spike << '\n';
  write_density(os, d.cont);
}

}  // namespace bhtbp
