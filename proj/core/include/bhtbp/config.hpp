#pragma once

// Flat "key = value" experiment config. Lists are comma separated, '#'
// starts a comment. Unknown keys are errors. See config_reference() for the
// schema and defaults.

#include <iosfwd>
#include <string>
#include <string_view>

#include "bhtbp/bench.hpp"

namespace bhtbp {

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// Applies one setting; throws ParseError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Human-readable schema with defaults.
std::string config_reference();

}  // namespace bhtbp
