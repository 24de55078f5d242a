#pragma once

#include "esn/dataset.hpp"
#include "esn/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace esn {

/// Strict parse: unknown keys, wrong types and invalid values throw ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// Reads a config file. A relative dataset.manifest is resolved against the
/// file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Default-parameter rule for `name` in {none, oja, bcm, ip}; nullopt for none.
std::optional<PlasticityRule> plasticity_rule_from_name(const std::string& name);
std::string plasticity_rule_name(const std::optional<PlasticityRule>& rule);

/// Parses a JSON file; unreadable files and syntax errors throw ConfigError.
nlohmann::json read_config_json(const std::filesystem::path& path);

} // namespace esn
