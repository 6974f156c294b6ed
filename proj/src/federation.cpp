#include "fedflow/federation.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <sstream>

#include <json.hpp>

#include "fedflow/errors.hpp"
#include "fedflow/io.hpp"
#include "fedflow/kernels.hpp"

namespace fedflow {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::NFL: return "nfl";
    case Scenario::CFL: return "cfl";
    case Scenario::DFL: return "dfl";
    case Scenario::DFL_GOSSIP: return "dfl_gossip";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "nfl") return Scenario::NFL;
  if (s == "cfl") return Scenario::CFL;
  if (s == "dfl") return Scenario::DFL;
  if (s == "dfl_gossip" || s == "gossip") return Scenario::DFL_GOSSIP;
  throw ConfigError("unknown scenario: '" + name + "' (expected nfl|cfl|dfl|dfl_gossip)");
}

Topology build_topology(int n, Scenario scenario) {
  if (scenario == Scenario::NFL) {
    if (n < 1) throw ConfigError("build_topology: need at least 1 node");
  } else if (n < 2) {
    throw ConfigError("build_topology: federated scenarios need at least 2 nodes");
  }

  Topology t;
  t.n = n;
  t.kind = scenario;
  switch (scenario) {
    case Scenario::NFL:
      break;
    case Scenario::CFL:
      for (int i = 0; i < n; ++i) t.edges.emplace_back(i, t.server_id());
      break;
    case Scenario::DFL:
    case Scenario::DFL_GOSSIP:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t.edges.emplace_back(i, j);
      break;
  }
  return t;
}

std::vector<std::pair<int, int>> gossip_pairing(int n, Rng& rng) {
  if (n < 2) throw ConfigError("gossip_pairing: need at least 2 nodes");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n));
  for (int s = 0; s < n; ++s) {
    auto r = static_cast<int>(rng.below(static_cast<uint64_t>(n - 1)));
    if (r >= s) ++r;
    pairs.emplace_back(s, r);
  }
  return pairs;
}

int64_t comm_cost_model(Scenario scenario, int n, int64_t model_bytes) {
  switch (scenario) {
    case Scenario::NFL: return 0;
    case Scenario::CFL: return 2LL * n * model_bytes;
    case Scenario::DFL: return static_cast<int64_t>(n) * (n - 1) * model_bytes;
    case Scenario::DFL_GOSSIP: return static_cast<int64_t>(n) * model_bytes;
  }
  return 0;
}

int64_t CommLedger::round_total(int round) const {
  int64_t sum = 0;
  for (const auto& e : entries)
    if (e.round == round) sum += e.bytes;
  return sum;
}

int64_t CommLedger::total() const {
  int64_t sum = 0;
  for (const auto& e : entries) sum += e.bytes;
  return sum;
}

std::string CommLedger::to_csv() const {
  std::string out = "round,sender,receiver,bytes\n";
  for (const auto& e : entries) {
    out += std::to_string(e.round);
    out += ',';
    out += std::to_string(e.sender);
    out += ',';
    out += std::to_string(e.receiver);
    out += ',';
    out += std::to_string(e.bytes);
    out += '\n';
  }
  return out;
}

std::string metrics_to_jsonl(const std::vector<MetricsRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    nlohmann::json j;
    j["round"] = row.round;
    j["entity"] = row.entity;
    j["scope"] = row.global_scope ? "global" : "local";
    j["tp"] = row.counts.tp;
    j["fp"] = row.counts.fp;
    j["tn"] = row.counts.tn;
    j["fn"] = row.counts.fn;
    j["accuracy"] = row.metrics.accuracy;
    j["precision"] = row.metrics.precision;
    j["recall"] = row.metrics.recall;
    j["f1"] = row.metrics.f1;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (rounds < 1) throw ConfigError("config: rounds must be >= 1");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (pca_k < 1) throw ConfigError("config: pca_k must be >= 1");
  if (forest_trees < 1 || forest_cap < 1)
    throw ConfigError("config: forest sizes must be >= 1");
  if (sgd.eta0 <= 0) throw ConfigError("config: eta0 must be positive");
  if (tree.grace_period < 1) throw ConfigError("config: grace_period must be >= 1");
  if (tree.delta <= 0 || tree.delta > 1) throw ConfigError("config: delta must lie in (0,1]");
}

namespace {

// Runs f(i) for i in [0,n) under OpenMP, rethrowing the first exception.
template <typename Fn>
void parallel_nodes(int64_t n, int threads, Fn&& f) {
  std::exception_ptr error;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (int64_t i = 0; i < n; ++i) {
    try {
      f(static_cast<size_t>(i));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

Engine::Engine(const ScenarioConfig& config, const DatasetSplit& split, const Standardizer& st,
               const PcaModel& pca)
    : config_(config), threads_(config.threads) {
  config_.validate();
  const auto n = static_cast<int>(split.shards.size());
  topology_ = build_topology(n, config_.scenario);
  if (config_.pca_k > pca.k)
    throw ConfigError("config: pca_k exceeds the fitted component count (" +
                      std::to_string(pca.k) + ")");

  auto project = [&](const std::vector<FlowRecord>& recs, std::vector<std::vector<double>>& xs,
                     std::vector<int>& ys) {
    xs.reserve(recs.size());
    ys.reserve(recs.size());
    for (const auto& rec : recs) {
      xs.push_back(transform(pca, st, rec.features, config_.pca_k));
      ys.push_back(rec.label);
    }
  };

  data_.resize(split.shards.size());
  nodes_.resize(split.shards.size());
  for (size_t i = 0; i < split.shards.size(); ++i) {
    const auto& shard = split.shards[i];
    project(shard.train, data_[i].train_xs, data_[i].train_ys);
    project(shard.local_validation, data_[i].val_xs, data_[i].val_ys);
    data_[i].schedule = make_batches(shard, config_.batch_size, config_.rounds, config_.seed);
    if (data_[i].val_xs.empty())
      throw DataError("entity " + shard.provider_name + " has an empty local validation set");

    nodes_[i].entity_id = shard.entity_id;
    const int k = config_.pca_k;
    switch (config_.model) {
      case ModelKind::svm: nodes_[i].model = linear_init(k, LossKind::hinge); break;
      case ModelKind::lr: nodes_[i].model = linear_init(k, LossKind::log_loss); break;
      case ModelKind::dt: nodes_[i].model = HoeffdingTree(k, config_.tree); break;
      case ModelKind::rf: {
        ForestConfig fc;
        fc.n_trees = config_.forest_trees;
        fc.cap = config_.forest_cap;
        fc.tree = config_.tree;
        nodes_[i].model = ForestModel(config_.forest_trees, k, fc,
                                      derive_stream(config_.seed, "forest", shard.entity_id));
        break;
      }
    }
  }
  project(split.global_validation, global_xs_, global_ys_);
  if (global_xs_.empty()) throw DataError("global validation set is empty");
}

void Engine::step() {
  if (done()) throw DataError("engine: batch schedule exhausted (all rounds consumed)");
  train_phase();
  share_phase();
  aggregate_phase();
  eval_phase();
  ++round_;
}

void Engine::train_phase() {
  parallel_nodes(static_cast<int64_t>(nodes_.size()), threads_, [&](size_t i) {
    const auto& batch = data_[i].schedule.batches[static_cast<size_t>(round_)];
    auto& model = nodes_[i].model;
    if (auto* lin = std::get_if<LinearModelParams>(&model)) {
      std::vector<std::vector<double>> xs;
      std::vector<int> ys;
      xs.reserve(batch.size());
      ys.reserve(batch.size());
      for (int idx : batch) {
        xs.push_back(data_[i].train_xs[static_cast<size_t>(idx)]);
        ys.push_back(data_[i].train_ys[static_cast<size_t>(idx)]);
      }
      *lin = linear_partial_fit(*lin, xs, ys, config_.sgd);
    } else if (auto* tree = std::get_if<HoeffdingTree>(&model)) {
      for (int idx : batch)
        tree->learn_one(data_[i].train_xs[static_cast<size_t>(idx)],
                        data_[i].train_ys[static_cast<size_t>(idx)]);
    } else {
      auto& forest = std::get<ForestModel>(model);
      for (int idx : batch)
        forest.learn_one(data_[i].train_xs[static_cast<size_t>(idx)],
                         data_[i].train_ys[static_cast<size_t>(idx)]);
    }
  });
}

Model Engine::server_aggregate(const std::vector<std::pair<int, std::string>>& uploads) const {
  // The CFL server holds no data; selection-based aggregation scores
  // candidates on the global validation set.
  if (config_.model == ModelKind::svm || config_.model == ModelKind::lr) {
    std::vector<LinearModelParams> params;
    params.reserve(uploads.size());
    for (const auto& [sender, bytes] : uploads)
      params.push_back(std::get<LinearModelParams>(model_deserialize(bytes)));
    return aggregate_mean(params);
  }
  if (config_.model == ModelKind::dt) {
    CandidateSet set;
    set.owner_entity = -1;
    for (const auto& [sender, bytes] : uploads)
      set.models.emplace_back(sender, model_deserialize(bytes));
    return select_best_tree(set, global_xs_, global_ys_);
  }
  std::vector<Model> holders;
  holders.reserve(uploads.size());
  std::vector<std::pair<int, const ForestModel*>> forests;
  for (const auto& [sender, bytes] : uploads) {
    holders.push_back(model_deserialize(bytes));
    forests.emplace_back(sender, &std::get<ForestModel>(holders.back()));
  }
  return flatten_and_prune(forests, global_xs_, global_ys_, config_.forest_cap);
}

void Engine::share_phase() {
  const int n = topology_.n;
  const int round_1 = round_ + 1;

  switch (config_.scenario) {
    case Scenario::NFL:
      return;

    case Scenario::CFL: {
      std::vector<std::pair<int, std::string>> uploads;
      uploads.reserve(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        std::string bytes = model_serialize(nodes_[static_cast<size_t>(i)].model);
        ledger_.entries.push_back(
            {round_1, i, topology_.server_id(), static_cast<int64_t>(bytes.size())});
        uploads.emplace_back(i, std::move(bytes));
      }
      const Model aggregate = server_aggregate(uploads);
      const std::string broadcast = model_serialize(aggregate);
      for (int i = 0; i < n; ++i) {
        ledger_.entries.push_back(
            {round_1, topology_.server_id(), i, static_cast<int64_t>(broadcast.size())});
        nodes_[static_cast<size_t>(i)].model = model_deserialize(broadcast);
      }
      return;
    }

    case Scenario::DFL: {
      std::vector<std::string> serialized(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) serialized[static_cast<size_t>(i)] = model_serialize(nodes_[static_cast<size_t>(i)].model);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          ledger_.entries.push_back(
              {round_1, i, j, static_cast<int64_t>(serialized[static_cast<size_t>(i)].size())});
          nodes_[static_cast<size_t>(j)].inbox.emplace_back(i, serialized[static_cast<size_t>(i)]);
        }
      return;
    }

    case Scenario::DFL_GOSSIP: {
      Rng rng(derive_stream(config_.seed, "gossip", static_cast<uint64_t>(round_)));
      const auto pairs = gossip_pairing(n, rng);
      std::vector<std::string> serialized(static_cast<size_t>(n));
      for (const auto& [s, r] : pairs) {
        auto& bytes = serialized[static_cast<size_t>(s)];
        if (bytes.empty()) bytes = model_serialize(nodes_[static_cast<size_t>(s)].model);
        ledger_.entries.push_back({round_1, s, r, static_cast<int64_t>(bytes.size())});
        nodes_[static_cast<size_t>(r)].inbox.emplace_back(s, bytes);
      }
      return;
    }
  }
}

void Engine::aggregate_node(size_t i) {
  auto& node = nodes_[i];
  if (node.inbox.empty()) return;
  std::sort(node.inbox.begin(), node.inbox.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const auto& val_xs =
      config_.validation_source == ValidationSource::global ? global_xs_ : data_[i].val_xs;
  const auto& val_ys =
      config_.validation_source == ValidationSource::global ? global_ys_ : data_[i].val_ys;

  if (config_.model == ModelKind::svm || config_.model == ModelKind::lr) {
    // Canonical sender-id order (own model in its own slot) so every node
    // sums the same list in the same order.
    std::vector<std::pair<int, LinearModelParams>> all;
    all.emplace_back(node.entity_id, std::get<LinearModelParams>(node.model));
    for (const auto& [sender, bytes] : node.inbox)
      all.emplace_back(sender, std::get<LinearModelParams>(model_deserialize(bytes)));
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<LinearModelParams> params;
    params.reserve(all.size());
    for (auto& [id, p] : all) params.push_back(std::move(p));
    node.model = aggregate_mean(params);
  } else if (config_.model == ModelKind::dt) {
    CandidateSet set;
    set.owner_entity = node.entity_id;
    set.models.emplace_back(node.entity_id, node.model);
    for (const auto& [sender, bytes] : node.inbox)
      set.models.emplace_back(sender, model_deserialize(bytes));
    node.model = select_best_tree(set, val_xs, val_ys);
  } else {
    std::vector<Model> holders;
    std::vector<std::pair<int, const ForestModel*>> forests;
    forests.emplace_back(node.entity_id, &std::get<ForestModel>(node.model));
    holders.reserve(node.inbox.size());
    for (const auto& [sender, bytes] : node.inbox) {
      holders.push_back(model_deserialize(bytes));
      forests.emplace_back(sender, &std::get<ForestModel>(holders.back()));
    }
    node.model = flatten_and_prune(forests, val_xs, val_ys, config_.forest_cap);
  }
  node.inbox.clear();
}

void Engine::aggregate_phase() {
  if (config_.scenario == Scenario::NFL || config_.scenario == Scenario::CFL) return;
  parallel_nodes(static_cast<int64_t>(nodes_.size()), threads_,
                 [&](size_t i) { aggregate_node(i); });
}

void Engine::eval_phase() {
  const size_t n = nodes_.size();
  std::vector<MetricsRow> rows(n * 2);
  parallel_nodes(static_cast<int64_t>(n * 2), threads_, [&](size_t task) {
    const size_t i = task / 2;
    const bool global_scope = (task % 2) == 1;
    const auto& xs = global_scope ? global_xs_ : data_[i].val_xs;
    const auto& ys = global_scope ? global_ys_ : data_[i].val_ys;
    const auto& model = nodes_[i].model;
    MetricsRow row;
    row.round = round_ + 1;
    row.entity = nodes_[i].entity_id;
    row.global_scope = global_scope;
    row.counts = eval_confusion_serial(
        xs, ys, [&](const std::vector<double>& x) { return model_predict(model, x); });
    row.metrics = compute_metrics(row.counts);
    rows[task] = row;
  });
  metrics_.insert(metrics_.end(), rows.begin(), rows.end());
}

std::vector<std::string> Engine::serialized_models() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& node : nodes_) out.push_back(model_serialize(node.model));
  return out;
}

RunOutputs run_scenario(const ScenarioConfig& config, const DatasetSplit& split,
                        const Standardizer& st, const PcaModel& pca) {
  Engine engine(config, split, st, pca);
  while (!engine.done()) engine.step();
  RunOutputs out;
  out.metrics = engine.metrics();
  out.ledger = engine.ledger();
  out.final_models = engine.serialized_models();
  return out;
}

}  // namespace fedflow
