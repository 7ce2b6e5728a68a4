#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qos/benchmark.hpp"
#include "qos/hierarchy.hpp"

namespace qos {

struct RunConfig {
  PipelineConfig pipeline;
  ExperimentOptions experiment;
};

// Every key accepted by apply_setting, in documentation order.
const std::vector<std::string>& config_keys();

// Sets one key. Throws InputError naming the key when it is unknown or the
// value does not parse.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// "key = value" lines; '#' starts a comment; blank lines are ignored.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& file);

// Every key with its resolved value, one "key = value" per line, in
// config_keys() order.
std::string format_config(const RunConfig& config);

// "256,128" or "256x128"; "none" or "" gives no hidden layer.
std::vector<std::size_t> parse_layers(std::string_view text);
std::string format_layers(const std::vector<std::size_t>& layers);

// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace qos
