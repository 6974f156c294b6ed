#include "fedflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "fedflow/errors.hpp"
#include "fedflow/io.hpp"

namespace fedflow {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "data_dir",    "out_dir",     "scenario",          "model",
      "rounds",      "batch_size",  "pca_k",             "seed",
      "threads",     "validation_source",                "eta0",
      "l2",          "epochs_per_batch",                 "lr_schedule",
      "delta",       "grace_period", "tie_threshold",    "split_candidates",
      "trees",       "tree_cap",
  };
  return keys;
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text, const std::string& origin) {
  KvConfig kv;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    kv.values[key] = value;
  }
  return kv;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.string());
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

int64_t KvConfig::get_int(const std::string& key, int64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size())
    throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
  return v;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  bool ok = false;
  double v = parse_double(it->second, ok);
  if (!ok) throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
  return v;
}

ScenarioConfig scenario_config_from_kv(const KvConfig& kv) {
  for (const auto& [key, value] : kv.values)
    if (!known_keys().count(key)) throw ConfigError("unknown config key: '" + key + "'");

  ScenarioConfig cfg;
  cfg.scenario = scenario_from_name(kv.get_string("scenario", "dfl_gossip"));
  cfg.model = model_kind_from_name(kv.get_string("model", "dt"));
  cfg.rounds = static_cast<int>(kv.get_int("rounds", 20));
  cfg.batch_size = static_cast<int>(kv.get_int("batch_size", 153));
  cfg.pca_k = static_cast<int>(kv.get_int("pca_k", 22));
  cfg.seed = static_cast<uint64_t>(kv.get_int("seed", 1));
  cfg.threads = static_cast<int>(kv.get_int("threads", 0));

  const std::string val_source = kv.get_string("validation_source", "local");
  if (val_source == "local")
    cfg.validation_source = ValidationSource::local;
  else if (val_source == "global")
    cfg.validation_source = ValidationSource::global;
  else
    throw ConfigError("validation_source must be local or global, got '" + val_source + "'");

  cfg.sgd.eta0 = kv.get_double("eta0", 0.01);
  cfg.sgd.l2 = kv.get_double("l2", 1e-4);
  cfg.sgd.epochs_per_batch = static_cast<int>(kv.get_int("epochs_per_batch", 1));
  const std::string schedule = kv.get_string("lr_schedule", "constant");
  if (schedule == "constant")
    cfg.sgd.schedule = LrSchedule::constant;
  else if (schedule == "inv_scaling")
    cfg.sgd.schedule = LrSchedule::inv_scaling;
  else
    throw ConfigError("lr_schedule must be constant or inv_scaling, got '" + schedule + "'");

  cfg.tree.delta = kv.get_double("delta", 1e-7);
  cfg.tree.grace_period = static_cast<int>(kv.get_int("grace_period", 200));
  cfg.tree.tie_threshold = kv.get_double("tie_threshold", 0.05);
  cfg.tree.candidates_per_feature = static_cast<int>(kv.get_int("split_candidates", 10));
  cfg.forest_trees = static_cast<int>(kv.get_int("trees", 10));
  cfg.forest_cap = static_cast<int>(kv.get_int("tree_cap", 10));

  cfg.validate();
  return cfg;
}

}  // namespace fedflow
