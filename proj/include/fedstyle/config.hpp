#pragma once

#include <map>
#include <string>
#include <vector>

#include "fedstyle/orchestrator.hpp"

namespace fedstyle {

// Flat "key = value" config document; '#' starts a comment, unknown keys
// are rejected. Every key is optional and falls back to the
// ExperimentConfig default.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Applies key/value overrides on top of a parsed config (CLI --key value).
void apply_overrides(ExperimentConfig& cfg,
                     const std::map<std::string, std::string>& overrides);

// Serializes the resolved config back to the same key = value format;
// re-feeding the echo reproduces the identical run.
std::string echo_config(const ExperimentConfig& cfg);

// All recognized keys, in echo order.
const std::vector<std::string>& config_keys();

}  // namespace fedstyle
