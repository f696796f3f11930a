#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "regretforge/trainer.hpp"

namespace regretforge {

/// Environment lookup used for REGRETFORGE_* overrides.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Dotted leaf keys of the config schema ("algo", "K", "navigator.lr", ...).
std::vector<std::string> config_keys();

/// Environment variable for a leaf key: "navigator.lr" -> "REGRETFORGE_NAVIGATOR_LR".
std::string env_name(std::string_view key);

/// Resolution order: defaults < file < REGRETFORGE_* variables < flags.
/// Flag overrides are (leaf key, text value) pairs. Errors are ConfigError naming the field.
TrainConfig resolve_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::pair<std::string, std::string>>& flags,
                           const EnvLookup& env = process_env);

/// Parses a complete or partial config document layered over the defaults.
TrainConfig config_from_json(std::string_view text);
std::string config_to_json(const TrainConfig& config, int indent = 2);

}  // namespace regretforge
