#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "fedflow/federation.hpp"

namespace fedflow {

// Flat `key = value` run configuration; '#' starts a comment. Every key can
// also be supplied as a CLI flag of the same name, which wins.
struct KvConfig {
  std::map<std::string, std::string> values;

  static KvConfig load(const std::filesystem::path& path);
  static KvConfig parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  void set(const std::string& key, std::string value) { values[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
};

// Documented scenario keys; anything else is rejected as a likely typo.
ScenarioConfig scenario_config_from_kv(const KvConfig& kv);

}  // namespace fedflow
