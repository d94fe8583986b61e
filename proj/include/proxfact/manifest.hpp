#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace proxfact {

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

// Provenance record written next to every command's outputs. Identical
// manifests (command, config hash, seed, output hashes) imply byte-identical
// outputs; timestamps are informational only.
struct RunManifest {
  std::string command_line;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  std::string code_version = "0.1.0";
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::uint64_t>> outputs;  // name, content hash

  void note(const std::string& line) { notes.push_back(line); }
  // Registers the output and returns its content hash.
  std::uint64_t record_output(const std::string& name, std::string_view content);

  std::string to_text() const;
  void write(const std::filesystem::path& dir) const;  // dir/manifest.txt
};

std::string utc_timestamp();

}  // namespace proxfact
