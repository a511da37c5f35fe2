#include "camtrap/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "camtrap/error.hpp"
#include "camtrap/version.hpp"

namespace camtrap {

std::uint64_t fnv1a_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file: " + file.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string relative_to(const std::filesystem::path& file, const std::filesystem::path& base) {
  const auto rel = std::filesystem::relative(file, base);
  return rel.generic_string();
}

}  // namespace

void RunManifest::add_param(std::string key, std::string value) {
  params.emplace_back(std::move(key), std::move(value));
}

void RunManifest::add_input(const std::filesystem::path& file,
                            const std::filesystem::path& base) {
  inputs.emplace_back(relative_to(file, base), hex64(fnv1a_file(file)));
}

void RunManifest::add_output(const std::filesystem::path& file,
                             const std::filesystem::path& base) {
  outputs.push_back(relative_to(file, base));
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["command"] = command;
  j["tool_version"] = tool_version.empty() ? kVersion : tool_version;
  if (seed) j["seed"] = *seed;

  auto sorted_params = params;
  std::sort(sorted_params.begin(), sorted_params.end());
  nlohmann::json jp = nlohmann::json::object();
  for (const auto& [k, v] : sorted_params) jp[k] = v;
  j["parameters"] = jp;

  auto sorted_inputs = inputs;
  std::sort(sorted_inputs.begin(), sorted_inputs.end());
  nlohmann::json ji = nlohmann::json::object();
  for (const auto& [k, v] : sorted_inputs) ji[k] = v;
  j["inputs"] = ji;

  auto sorted_outputs = outputs;
  std::sort(sorted_outputs.begin(), sorted_outputs.end());
  j["outputs"] = sorted_outputs;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace camtrap
