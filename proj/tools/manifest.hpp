#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace zonenet::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Everything needed to repeat a run. Inputs are recorded by content hash,
// not by path, so two runs on equal inputs write equal manifests.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_hashes;  // role -> sha256
  nlohmann::json settings = nlohmann::json::object();
};

nlohmann::json manifest_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m,
                    const std::string& name = "run_manifest.json");

}  // namespace zonenet::cli
