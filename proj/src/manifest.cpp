#include "proxfact/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "proxfact/csv.hpp"

namespace proxfact {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t RunManifest::record_output(const std::string& name, std::string_view content) {
  const std::uint64_t h = fnv1a64(content);
  outputs.emplace_back(name, h);
  return h;
}

std::string RunManifest::to_text() const {
  std::string out;
  out += "command = " + command_line + "\n";
  out += "config_hash = " + hex64(config_hash) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "code_version = " + code_version + "\n";
  out += "started_utc = " + started_utc + "\n";
  out += "finished_utc = " + finished_utc + "\n";
  for (const auto& n : notes) out += "note = " + n + "\n";
  for (const auto& [name, hash] : outputs)
    out += "output = " + name + " " + hex64(hash) + "\n";
  return out;
}

void RunManifest::write(const std::filesystem::path& dir) const {
  write_text_file(dir / "manifest.txt", to_text());
}

}  // namespace proxfact
