#pragma once

// Plain-text instance format, used for failure-case dumps:
//
//   n m L seed
//   row:sign,row:sign,...        one line per column ("-" if empty)
//   x index:value,...            optional, nonzeros of the signal ("x -" if none)
//   z v,v,...                    optional measurement vector
//   noise_std v                  optional
//
// Reals are written with 17 significant digits so a dump reloads exactly.

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "bhtbp/model.hpp"

namespace bhtbp {

struct Instance {
  SparseBernoulliMatrix matrix;
  std::uint64_t seed = 0;
  std::optional<SparseSignal> signal;
  std::optional<Measurement> measurement;
};

void write_instance(std::ostream& os, const SparseBernoulliMatrix& matrix, std::uint64_t seed,
                    const SparseSignal* signal = nullptr, const Measurement* meas = nullptr);

/// Throws ParseError on malformed input.
Instance read_instance(std::istream& is);

}  // namespace bhtbp
