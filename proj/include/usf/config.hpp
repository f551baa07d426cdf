#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace usf {

struct SimConfig;
struct RunResult;

/// Flat key=value config file. '#' starts a comment, blank lines ignored,
/// unknown keys rejected when converted to a SimConfig.
struct ConfigMap {
  std::map<std::string, std::string> kv;

  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

SimConfig sim_config_from(const ConfigMap& map);

/// Canonical echo of a SimConfig in the same key=value syntax; hashed into
/// the run manifest.
std::string config_echo(const SimConfig& config);

/// JSON run manifest: config echo, git-style content hash of the echo, seed,
/// and derived constants.
void write_manifest(const std::string& path, const SimConfig& config, const RunResult& result,
                    std::uint64_t n_steps);

}  // namespace usf
