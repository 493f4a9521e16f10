#pragma once

// Discretized probability measures on a uniform, zero-centred grid.
//
// Densities are stored as per-bin probability *mass*, not height, so
// normalization is an exact sum and a Dirac at zero is just one more finite
// mass. A SpikedDensity keeps that Dirac separate from the continuous part:
// the spike is the s = 0 atom of a spike-and-slab mixture, while the
// continuous zero bin belongs to the slab.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace bhtbp {

/// Reads below this are clamped before entering a product.
inline constexpr double kMassFloor = 1e-12;
/// Totals at or below this cannot be normalized.
inline constexpr double kNormalizeFloor = 1e-300;

/// Uniform grid x_i = (i - half_bins) * spacing, i in [0, 2*half_bins].
class Grid {
 public:
  Grid() = default;

  /// G points over [-R, R]; G must be odd and >= 3, R > 0.
  static Grid symmetric(double half_range, std::size_t points);
  /// 2*half_bins + 1 points at the given spacing (half_bins may be 0).
  static Grid with_spacing(double spacing, std::size_t half_bins);

  double spacing() const { return spacing_; }
  std::size_t half_bins() const { return half_bins_; }
  std::size_t points() const { return 2 * half_bins_ + 1; }
  std::size_t center() const { return half_bins_; }
  double half_range() const { return spacing_ * static_cast<double>(half_bins_); }
  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(half_bins_)) * spacing_;
  }

  bool same_spacing(const Grid& other) const;
  bool operator==(const Grid& other) const {
    return half_bins_ == other.half_bins_ && same_spacing(other);
  }

 private:
  Grid(double spacing, std::size_t half_bins) : spacing_(spacing), half_bins_(half_bins) {}
  double spacing_ = 1.0;
  std::size_t half_bins_ = 0;
};

struct ContinuousDensity {
  Grid grid;
  std::vector<double> mass;

  ContinuousDensity() = default;
  explicit ContinuousDensity(const Grid& g) : grid(g), mass(g.points(), 0.0) {}
  ContinuousDensity(const Grid& g, std::vector<double> m);

  double total() const;
};

struct SpikedDensity {
  double spike = 0.0;
  ContinuousDensity cont;

  double total() const { return spike + cont.total(); }
};

/// Bin mass = integral of N(0, std^2) over [x_i - d/2, x_i + d/2], normalized.
/// A std far below the spacing yields (numerically) a single-bin mass.
ContinuousDensity gaussian_on_grid(double std, const Grid& grid);
ContinuousDensity uniform_on_grid(const Grid& grid);
/// All mass in the zero bin.
ContinuousDensity unit_mass(const Grid& grid);

/// (1 - q) delta(x) + q N(x; 0, slab_std^2).
SpikedDensity spike_and_slab(double q, double slab_std, const Grid& grid);

/// Scale to unit total; throws DegenerateMessage when total <= kNormalizeFloor.
ContinuousDensity normalize(ContinuousDensity d);
SpikedDensity normalize(SpikedDensity d);

/// Variable-node product: spike and continuous masses are multiplied by each
/// factor's (floored) value at the matching bin; the spike uses the zero bin.
/// Result is normalized. Throws DimensionMismatch on grid mismatch and
/// DegenerateMessage if the product vanishes.
SpikedDensity product_spiked(const SpikedDensity& base,
                             std::span<const ContinuousDensity* const> factors);
SpikedDensity product_spiked(const SpikedDensity& base,
                             const std::vector<ContinuousDensity>& factors);

/// Linear convolution; output half-range is the sum of input half-ranges.
/// Inputs must share spacing. Output normalized.
ContinuousDensity convolve(const ContinuousDensity& a, const ContinuousDensity& b);

/// w_a * b + convolve(a.cont, b), with the spike carried into the zero bin of
/// the result grid (so a spike convolved with a one-bin b stays a point mass).
ContinuousDensity convolve_spiked(const SpikedDensity& a, const ContinuousDensity& b);

/// Density of -x given the density of x.
ContinuousDensity reflect(ContinuousDensity d);
SpikedDensity reflect(SpikedDensity d);

/// Folds the spike into the zero bin, giving the plain mass vector of the
/// measure (used when the spike/slab distinction no longer matters).
ContinuousDensity flatten(const SpikedDensity& d);

struct ShiftedRead {
  ContinuousDensity likelihood;  ///< normalized
  bool degenerate = false;       ///< every read fell on the floor
};

/// Likelihood over out_grid obtained by reading the z-domain density d at
/// z - sign * x_i with linear interpolation. Reads outside d's range, and
/// reads below kMassFloor, return kMassFloor.
ShiftedRead read_shifted(const ContinuousDensity& d, double z, int sign, const Grid& out_grid);
ContinuousDensity evaluate_shifted(const ContinuousDensity& d, double z, int sign,
                                   const Grid& out_grid);

/// Half the L1 distance between mass vectors (spike included).
double total_variation(const ContinuousDensity& a, const ContinuousDensity& b);
double total_variation(const SpikedDensity& a, const SpikedDensity& b);

/// Debug dump: "x mass" per line; spiked densities first emit "# spike w".
void write_density(std::ostream& os, const ContinuousDensity& d);
void write_density(std::ostream& os, const SpikedDensity& d);

}  // namespace bhtbp
