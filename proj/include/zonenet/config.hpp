#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "zonenet/setup.hpp"

namespace zonenet {

inline constexpr int kSchemaVersion = 1;

// `where` is a JSON-pointer style location such as /priors/occupancy/mu.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& message)
      : std::runtime_error(where + ": " + message), where_(where), message_(message) {}
  const std::string& where() const { return where_; }
  const std::string& message() const { return message_; }

 private:
  std::string where_, message_;
};

// Unknown keys, wrong types and a missing or unsupported schema_version are
// errors.
ProjectConfig parse_config(const nlohmann::json& j);
ProjectConfig load_config(const std::filesystem::path& path);

// Inverse of parse_config; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ProjectConfig& config);

}  // namespace zonenet
