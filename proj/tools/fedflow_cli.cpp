#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedflow/config.hpp"
#include "fedflow/csv.hpp"
#include "fedflow/errors.hpp"
#include "fedflow/federation.hpp"
#include "fedflow/io.hpp"
#include "fedflow/storage.hpp"
#include "fedflow/sweep.hpp"
#include "fedflow/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fedflow;

namespace {

constexpr const char* kToolVersion = "0.1.0";

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::map<std::string, std::string>& config,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                    int64_t duration_ms) {
  json m;
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config"] = config;
  json digests = json::object();
  for (const auto& p : inputs)
    if (fs::exists(p) && fs::is_regular_file(p)) digests[p.string()] = file_digest_hex(p);
  m["inputs"] = std::move(digests);
  json outs = json::array();
  for (const auto& p : outputs) outs.push_back(p.string());
  m["outputs"] = std::move(outs);
  m["duration_ms"] = duration_ms;
  write_file_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
}

json parse_json_file(const fs::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("not valid json: " + path.string());
  return j;
}

// ---------------------------------------------------------------- prepare --

struct PrepareInputs {
  PartitionSpec partition;
  CsvSchema schema;
};

PrepareInputs parse_partition_file(const fs::path& path) {
  const json j = parse_json_file(path);
  PrepareInputs out;
  out.schema = dohlyzer_schema();
  try {
    if (j.contains("schema")) {
      const auto& s = j.at("schema");
      if (s.contains("feature_columns"))
        out.schema.feature_columns = s.at("feature_columns").get<std::vector<std::string>>();
      if (s.contains("label_column")) out.schema.label_column = s.at("label_column");
      if (s.contains("source_ip_column")) out.schema.source_ip_column = s.at("source_ip_column");
      if (s.contains("dest_ip_column")) out.schema.dest_ip_column = s.at("dest_ip_column");
      if (s.contains("benign_value")) out.schema.benign_value = s.at("benign_value");
      if (s.contains("malicious_value")) out.schema.malicious_value = s.at("malicious_value");
    }
    for (const auto& e : j.at("entities")) {
      PartitionRule rule;
      rule.entity_id = e.at("id").get<int>();
      rule.name = e.at("name").get<std::string>();
      rule.dest_ips = e.at("ips").get<std::vector<std::string>>();
      out.partition.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& ex) {
    throw ConfigError("malformed partition spec " + path.string() + ": " + ex.what());
  }
  return out;
}

void print_counts_table(const std::vector<PartitionCounts>& counts, int64_t discarded) {
  std::printf("%-4s %-16s %10s %10s %10s\n", "id", "entity", "total", "malicious", "benign");
  for (size_t i = 0; i < counts.size(); ++i)
    std::printf("%-4zu %-16s %10lld %10lld %10lld\n", i, counts[i].name.c_str(),
                static_cast<long long>(counts[i].total),
                static_cast<long long>(counts[i].malicious),
                static_cast<long long>(counts[i].benign));
  std::printf("discarded (no matching rule): %lld\n", static_cast<long long>(discarded));
}

int cmd_prepare(const fs::path& csv_path, const fs::path& partition_path, const fs::path& out_dir,
                uint64_t seed, double global_frac, double local_frac) {
  Stopwatch watch;
  auto inputs = parse_partition_file(partition_path);
  auto loaded = load_flow_csv(csv_path, inputs.schema);
  auto partition = partition_by_entity(loaded, inputs.partition);
  print_counts_table(partition.counts, partition.discarded);

  // rows with undefined statistics (blank/NaN cells) cannot be trained on
  int64_t dropped = 0;
  for (auto& shard : partition.per_entity) {
    auto kept = shard;
    kept.clear();
    for (auto& rec : shard) {
      bool finite = true;
      for (double v : rec.features) finite = finite && std::isfinite(v);
      if (finite)
        kept.push_back(std::move(rec));
      else
        ++dropped;
    }
    shard = std::move(kept);
  }
  if (dropped > 0)
    std::printf("dropped rows with non-finite features: %lld\n", static_cast<long long>(dropped));

  auto prepared = prepare_pipeline(partition.per_entity, partition.entity_names, global_frac,
                                   local_frac, seed);
  save_prepared(out_dir, prepared, partition.counts, partition.discarded);
  write_manifest(out_dir, "prepare",
                 {{"csv", csv_path.string()},
                  {"partition", partition_path.string()},
                  {"seed", std::to_string(seed)},
                  {"global_fraction", format_double(global_frac)},
                  {"local_fraction", format_double(local_frac)},
                  {"dropped_nonfinite", std::to_string(dropped)}},
                 {csv_path, partition_path},
                 {out_dir / "dataset.json", out_dir / "preprocess.json"}, watch.elapsed_ms());
  std::printf("prepared %zu entities into %s\n", prepared.split.shards.size(),
              out_dir.string().c_str());
  return 0;
}

// ------------------------------------------------------------------ synth --

SyntheticSpec parse_synth_spec(const fs::path& path) {
  const json j = parse_json_file(path);
  SyntheticSpec spec;
  try {
    spec.dimension = j.at("dimension").get<int>();
    for (const auto& je : j.at("entities")) {
      SyntheticEntitySpec ent;
      ent.name = je.at("name").get<std::string>();
      for (const auto& jc : je.at("clusters")) {
        GaussianCluster cl;
        cl.center = jc.at("center").get<std::vector<double>>();
        cl.sigma = jc.at("sigma").get<double>();
        cl.count = jc.at("count").get<int64_t>();
        cl.label = jc.at("label").get<int>();
        ent.clusters.push_back(std::move(cl));
      }
      spec.entities.push_back(std::move(ent));
    }
  } catch (const json::exception& ex) {
    throw ConfigError("malformed synthetic spec " + path.string() + ": " + ex.what());
  }
  return spec;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, uint64_t seed,
              double global_frac, double local_frac) {
  Stopwatch watch;
  auto spec = parse_synth_spec(spec_path);
  auto per_entity = generate_synthetic(spec, seed);
  std::vector<std::string> names;
  for (const auto& e : spec.entities) names.push_back(e.name);

  std::vector<PartitionCounts> counts(per_entity.size());
  for (size_t e = 0; e < per_entity.size(); ++e) {
    counts[e].name = names[e];
    counts[e].total = static_cast<int64_t>(per_entity[e].size());
    for (const auto& rec : per_entity[e]) (rec.label ? counts[e].malicious : counts[e].benign)++;
  }
  print_counts_table(counts, 0);

  auto prepared = prepare_pipeline(per_entity, names, global_frac, local_frac, seed);
  save_prepared(out_dir, prepared, counts, 0);
  write_manifest(out_dir, "synth",
                 {{"spec", spec_path.string()},
                  {"seed", std::to_string(seed)},
                  {"global_fraction", format_double(global_frac)},
                  {"local_fraction", format_double(local_frac)}},
                 {spec_path}, {out_dir / "dataset.json", out_dir / "preprocess.json"},
                 watch.elapsed_ms());
  std::printf("synthesized %zu entities into %s\n", per_entity.size(), out_dir.string().c_str());
  return 0;
}

// -------------------------------------------------------------------- run --

int cmd_run(const KvConfig& kv) {
  Stopwatch watch;
  const fs::path data_dir = kv.get_string("data_dir", "");
  const fs::path out_dir = kv.get_string("out_dir", "");
  if (data_dir.empty()) throw ConfigError("run: data_dir is required (--data or config)");
  if (out_dir.empty()) throw ConfigError("run: out_dir is required (--out or config)");

  KvConfig scenario_kv = kv;
  scenario_kv.values.erase("data_dir");
  scenario_kv.values.erase("out_dir");
  const ScenarioConfig cfg = scenario_config_from_kv(scenario_kv);

  auto prepared = load_prepared(data_dir);
  auto result = run_scenario(cfg, prepared.split, prepared.standardizer, prepared.pca);

  fs::create_directories(out_dir / "models");
  write_file_atomic(out_dir / "metrics.jsonl", metrics_to_jsonl(result.metrics));
  write_file_atomic(out_dir / "ledger.csv", result.ledger.to_csv());
  std::vector<fs::path> outputs{out_dir / "metrics.jsonl", out_dir / "ledger.csv"};
  for (size_t i = 0; i < result.final_models.size(); ++i) {
    const auto path =
        out_dir / "models" /
        ("entity_" + std::to_string(prepared.split.shards[i].entity_id) + ".json");
    write_file_atomic(path, result.final_models[i]);
    outputs.push_back(path);
  }
  write_manifest(out_dir, "run", kv.values,
                 {data_dir / "dataset.json", data_dir / "preprocess.json"}, outputs,
                 watch.elapsed_ms());
  std::printf("run complete: %s model=%s rounds=%d -> %s\n", scenario_name(cfg.scenario),
              model_kind_name(cfg.model), cfg.rounds, out_dir.string().c_str());
  return 0;
}

// -------------------------------------------------------------- sweep-pca --

int cmd_sweep_pca(const KvConfig& kv, int k_min, int k_max, int k_step) {
  Stopwatch watch;
  const fs::path data_dir = kv.get_string("data_dir", "");
  const fs::path out_dir = kv.get_string("out_dir", "");
  if (data_dir.empty()) throw ConfigError("sweep-pca: data_dir is required (--data or config)");
  if (out_dir.empty()) throw ConfigError("sweep-pca: out_dir is required (--out or config)");
  if (k_min < 1 || k_max < k_min || k_step < 1)
    throw ConfigError("sweep-pca: need 1 <= k-min <= k-max and k-step >= 1");

  KvConfig scenario_kv = kv;
  scenario_kv.values.erase("data_dir");
  scenario_kv.values.erase("out_dir");
  const ScenarioConfig base = scenario_config_from_kv(scenario_kv);

  std::vector<int> ks;
  for (int k = k_min; k <= k_max; k += k_step) ks.push_back(k);

  auto prepared = load_prepared(data_dir);
  auto result = sweep_components(ks, base, prepared.split, prepared.standardizer, prepared.pca);

  std::string table = "k,model,entity,accuracy\n";
  for (const auto& row : result.rows) {
    table += std::to_string(row.k);
    table += ',';
    table += model_kind_name(row.model);
    table += ',';
    table += std::to_string(row.entity);
    table += ',';
    table += format_double(row.accuracy);
    table += '\n';
  }
  std::string stats = "k,mean_accuracy,entity_stddev,norm_mean,norm_stddev,selected\n";
  for (const auto& st : result.stats) {
    stats += std::to_string(st.k);
    stats += ',';
    stats += format_double(st.mean_accuracy);
    stats += ',';
    stats += format_double(st.entity_stddev);
    stats += ',';
    stats += format_double(st.norm_mean);
    stats += ',';
    stats += format_double(st.norm_stddev);
    stats += ',';
    stats += st.k == result.selected_k ? '1' : '0';
    stats += '\n';
  }
  write_file_atomic(out_dir / "sweep_table.csv", table);
  write_file_atomic(out_dir / "sweep_stats.csv", stats);
  write_manifest(out_dir, "sweep-pca", kv.values,
                 {data_dir / "dataset.json", data_dir / "preprocess.json"},
                 {out_dir / "sweep_table.csv", out_dir / "sweep_stats.csv"}, watch.elapsed_ms());
  std::printf("sweep complete: k in [%d,%d] step %d, selected k=%d\n", k_min, k_max, k_step,
              result.selected_k);
  return 0;
}

// ----------------------------------------------------------------- report --

struct ReportRow {
  int round = 0;
  int entity = 0;
  std::string scope;
  double accuracy = 0;
  double f1 = 0;
};

std::vector<ReportRow> parse_metrics_file(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<ReportRow> rows;
  size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed metrics line");
    try {
      ReportRow row;
      row.round = j.at("round").get<int>();
      row.entity = j.at("entity").get<int>();
      row.scope = j.at("scope").get<std::string>();
      row.accuracy = j.at("accuracy").get<double>();
      row.f1 = j.at("f1").get<double>();
      rows.push_back(row);
    } catch (const json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (rows.empty()) throw DataError("metrics file has no rows: " + path.string());
  return rows;
}

std::string label_for_metrics_file(const fs::path& path) {
  const fs::path manifest = path.parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    json j = json::parse(read_file(manifest), nullptr, false);
    if (!j.is_discarded() && j.contains("config")) {
      const auto& cfg = j.at("config");
      std::string scenario = cfg.value("scenario", "");
      std::string model = cfg.value("model", "");
      if (!scenario.empty() || !model.empty()) return scenario + "/" + model;
    }
  }
  return path.parent_path().filename().string().empty()
             ? path.stem().string()
             : path.parent_path().filename().string();
}

int cmd_report(const std::vector<fs::path>& inputs, const std::string& scope,
               const fs::path& csv_out, const fs::path& curves_out) {
  if (inputs.empty()) throw ConfigError("report: at least one metrics file is required");

  struct PerFile {
    std::string label;
    std::map<int, std::pair<double, double>> final_by_entity;  // entity -> (acc, f1)
    std::vector<ReportRow> rows;
  };
  std::vector<PerFile> files;
  std::set<int> entities;
  for (const auto& path : inputs) {
    PerFile pf;
    pf.label = label_for_metrics_file(path);
    pf.rows = parse_metrics_file(path);
    int last_round = 0;
    for (const auto& row : pf.rows) last_round = std::max(last_round, row.round);
    for (const auto& row : pf.rows) {
      if (row.round != last_round || row.scope != scope) continue;
      pf.final_by_entity[row.entity] = {row.accuracy, row.f1};
      entities.insert(row.entity);
    }
    files.push_back(std::move(pf));
  }

  std::printf("final-round %s-validation accuracy (f1)\n", scope.c_str());
  std::printf("%-8s", "entity");
  for (const auto& pf : files) std::printf(" %20s", pf.label.c_str());
  std::printf("\n");
  std::string csv = "entity";
  for (const auto& pf : files) csv += "," + pf.label + "_accuracy," + pf.label + "_f1";
  csv += '\n';
  for (int entity : entities) {
    std::printf("%-8d", entity);
    csv += std::to_string(entity);
    for (const auto& pf : files) {
      auto it = pf.final_by_entity.find(entity);
      if (it == pf.final_by_entity.end()) {
        std::printf(" %20s", "-");
        csv += ",,";
      } else {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "%.4f (%.4f)", it->second.first, it->second.second);
        std::printf(" %20s", cell);
        csv += "," + format_double(it->second.first) + "," + format_double(it->second.second);
      }
    }
    std::printf("\n");
    csv += '\n';
  }
  if (!csv_out.empty()) write_file_atomic(csv_out, csv);

  if (!curves_out.empty()) {
    std::string curves = "label,entity,round,scope,accuracy,f1\n";
    for (const auto& pf : files)
      for (const auto& row : pf.rows) {
        curves += pf.label;
        curves += ',';
        curves += std::to_string(row.entity);
        curves += ',';
        curves += std::to_string(row.round);
        curves += ',';
        curves += row.scope;
        curves += ',';
        curves += format_double(row.accuracy);
        curves += ',';
        curves += format_double(row.f1);
        curves += '\n';
      }
    write_file_atomic(curves_out, curves);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous decentralized federated learning simulator for DoH flow classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "partition a flow csv and fit preprocessing");
  std::string prep_csv, prep_partition, prep_out;
  uint64_t prep_seed = 1;
  double prep_global = 0.10, prep_local = 0.10;
  prepare->add_option("--csv", prep_csv, "flow-feature csv export")->required();
  prepare->add_option("--partition", prep_partition, "partition spec json")->required();
  prepare->add_option("--out", prep_out, "output directory")->required();
  prepare->add_option("--seed", prep_seed, "split seed");
  prepare->add_option("--global-frac", prep_global, "global validation fraction");
  prepare->add_option("--local-frac", prep_local, "local validation fraction");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic prepared dataset");
  std::string synth_spec, synth_out;
  uint64_t synth_seed = 1;
  double synth_global = 0.10, synth_local = 0.10;
  synth->add_option("--spec", synth_spec, "cluster spec json")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generation seed");
  synth->add_option("--global-frac", synth_global, "global validation fraction");
  synth->add_option("--local-frac", synth_local, "local validation fraction");

  // shared run/sweep options
  struct RunFlags {
    std::string config, data, out, scenario, model, validation_source, lr_schedule;
    int64_t rounds = 0, batch_size = 0, pca_k = 0, seed = 0, threads = -1;
    int64_t grace = 0, candidates = 0, trees = 0, tree_cap = 0, epochs = 0;
    double eta0 = 0, l2 = -1, delta = 0, tie = -1;
  };
  auto add_run_flags = [](CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "key=value configuration file");
    cmd->add_option("--data", f.data, "prepared data directory");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--scenario", f.scenario, "nfl|cfl|dfl|dfl_gossip");
    cmd->add_option("--model", f.model, "svm|lr|dt|rf");
    cmd->add_option("--rounds", f.rounds, "federation rounds");
    cmd->add_option("--batch-size", f.batch_size, "records per round per entity");
    cmd->add_option("--pca-k", f.pca_k, "number of principal components");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--threads", f.threads, "worker thread cap (0 = library default)");
    cmd->add_option("--validation-source", f.validation_source,
                    "validation set for aggregation: local|global");
    cmd->add_option("--eta0", f.eta0, "sgd learning rate");
    cmd->add_option("--l2", f.l2, "sgd l2 regularization");
    cmd->add_option("--epochs", f.epochs, "sgd epochs per batch");
    cmd->add_option("--lr-schedule", f.lr_schedule, "constant|inv_scaling");
    cmd->add_option("--delta", f.delta, "hoeffding split confidence");
    cmd->add_option("--grace-period", f.grace, "samples between split checks");
    cmd->add_option("--tie-threshold", f.tie, "hoeffding tie threshold");
    cmd->add_option("--split-candidates", f.candidates, "candidate thresholds per feature");
    cmd->add_option("--trees", f.trees, "forest size");
    cmd->add_option("--tree-cap", f.tree_cap, "forest cap after aggregation");
  };
  auto kv_from_flags = [](CLI::App* cmd, const RunFlags& f) {
    KvConfig kv;
    if (!f.config.empty()) kv = KvConfig::load(f.config);
    auto set_if = [&](const char* flag, const char* key, const std::string& value) {
      if (cmd->count(flag)) kv.set(key, value);
    };
    set_if("--data", "data_dir", f.data);
    set_if("--out", "out_dir", f.out);
    set_if("--scenario", "scenario", f.scenario);
    set_if("--model", "model", f.model);
    set_if("--rounds", "rounds", std::to_string(f.rounds));
    set_if("--batch-size", "batch_size", std::to_string(f.batch_size));
    set_if("--pca-k", "pca_k", std::to_string(f.pca_k));
    set_if("--seed", "seed", std::to_string(f.seed));
    set_if("--threads", "threads", std::to_string(f.threads));
    set_if("--validation-source", "validation_source", f.validation_source);
    set_if("--eta0", "eta0", format_double(f.eta0));
    set_if("--l2", "l2", format_double(f.l2));
    set_if("--epochs", "epochs_per_batch", std::to_string(f.epochs));
    set_if("--lr-schedule", "lr_schedule", f.lr_schedule);
    set_if("--delta", "delta", format_double(f.delta));
    set_if("--grace-period", "grace_period", std::to_string(f.grace));
    set_if("--tie-threshold", "tie_threshold", format_double(f.tie));
    set_if("--split-candidates", "split_candidates", std::to_string(f.candidates));
    set_if("--trees", "trees", std::to_string(f.trees));
    set_if("--tree-cap", "tree_cap", std::to_string(f.tree_cap));
    return kv;
  };

  auto* run = app.add_subcommand("run", "execute one federation scenario");
  RunFlags run_flags;
  add_run_flags(run, run_flags);

  auto* sweep = app.add_subcommand("sweep-pca", "scenario runs across a pca component range");
  RunFlags sweep_flags;
  add_run_flags(sweep, sweep_flags);
  int64_t k_min = 0, k_max = 0, k_step = 1;
  sweep->add_option("--k-min", k_min, "first component count")->required();
  sweep->add_option("--k-max", k_max, "last component count")->required();
  sweep->add_option("--k-step", k_step, "stride through the range");

  auto* report = app.add_subcommand("report", "final-round comparison tables from metrics files");
  std::vector<std::string> report_inputs;
  std::string report_scope = "global", report_csv, report_curves;
  report->add_option("--in", report_inputs, "metrics.jsonl files")->required()->expected(-1);
  report->add_option("--scope", report_scope, "local|global");
  report->add_option("--csv", report_csv, "write the comparison table as csv");
  report->add_option("--curves", report_curves, "write per-round accuracy curves as csv");

  try {
    app.parse(argc, argv);
    if (prepare->parsed())
      return cmd_prepare(prep_csv, prep_partition, prep_out, prep_seed, prep_global, prep_local);
    if (synth->parsed())
      return cmd_synth(synth_spec, synth_out, synth_seed, synth_global, synth_local);
    if (run->parsed()) return cmd_run(kv_from_flags(run, run_flags));
    if (sweep->parsed())
      return cmd_sweep_pca(kv_from_flags(sweep, sweep_flags), static_cast<int>(k_min),
                           static_cast<int>(k_max), static_cast<int>(k_step));
    if (report->parsed()) {
      if (report_scope != "local" && report_scope != "global")
        throw ConfigError("report: scope must be local or global");
      std::vector<fs::path> paths(report_inputs.begin(), report_inputs.end());
      return cmd_report(paths, report_scope, report_csv, report_curves);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: [usage] " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: [config] " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: [data] " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "error: [model] " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: [internal] " << e.what() << "\n";
    return 5;
  }
}
