#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fbmlab::config {

// TOML subset: tables, dotted keys, strings, integers, floats (inf, nan),
// booleans, arrays (may span lines), inline tables and # comments.
// Arrays of tables and dates are not supported. Errors name the line.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_file(const std::filesystem::path& file);

std::uint64_t fnv1a64(std::string_view data);
// Hex FNV-1a of the canonical (sorted-key, compact) JSON dump.
std::string config_hash(const nlohmann::json& cfg);

// JSON-schema-style description of an experiment config.
const nlohmann::json& schema();
// Checks `value` against a schema node: type, enum, minimum, properties,
// required, additionalProperties, items. Throws ConfigError naming the field.
void check_schema(const nlohmann::json& value, const nlohmann::json& node, const std::string& where = "config");

struct ExperimentConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  std::string sampler;
  nlohmann::json params = nlohmann::json::object();
  double dt = 1e-3;
  std::int64_t n_paths = 1;
  std::int64_t neg_pieces = 10;
  std::int64_t pos_pieces = 0;
  std::string format = "csv";
  std::optional<std::string> output_dir;
  std::vector<std::string> suites;
  double alpha = 0.01;
  nlohmann::json suite_params = nlohmann::json::object();  // per-suite tables
  nlohmann::json eigen = nlohmann::json::object();

  // Effective config as JSON; this is what gets hashed (output_dir excluded).
  nlohmann::json to_json() const;
};

// Validates against the schema and the sampler registry.
ExperimentConfig from_json(const nlohmann::json& j);

}  // namespace fbmlab::config
