#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace persona::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::filesystem::path> inputs;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path& path) const;
};

// "<out without extension>.manifest.json"
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace persona::cli
