#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace camtrap {

/// 64-bit FNV-1a over the file bytes; cheap content fingerprint for manifests.
std::uint64_t fnv1a_file(const std::filesystem::path& file);

/// Audit record written next to each command's outputs. Everything in it is
/// stable across reruns and thread counts: parameters are key-sorted, paths
/// are relative to the project root, and --threads is deliberately omitted by
/// callers.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> inputs;  // rel path -> hash
  std::vector<std::string> outputs;                         // rel paths

  void add_param(std::string key, std::string value);
  void add_input(const std::filesystem::path& file, const std::filesystem::path& base);
  void add_output(const std::filesystem::path& file, const std::filesystem::path& base);
  void write(const std::filesystem::path& path) const;
};

}  // namespace camtrap
