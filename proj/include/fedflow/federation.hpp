#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedflow/aggregation.hpp"
#include "fedflow/dataset.hpp"
#include "fedflow/features.hpp"
#include "fedflow/metrics.hpp"
#include "fedflow/model.hpp"
#include "fedflow/rng.hpp"

namespace fedflow {

enum class Scenario { NFL, CFL, DFL, DFL_GOSSIP };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

enum class ValidationSource { local, global };

// Static undirected peer graph. CFL adds a distinguished server whose node
// id is n (one past the last entity id).
struct Topology {
  int n = 0;
  Scenario kind = Scenario::NFL;
  std::vector<std::pair<int, int>> edges;

  int server_id() const { return n; }
};

Topology build_topology(int n, Scenario scenario);

// One outgoing transfer per node; the receiver is uniform over the other
// n-1 nodes. A node may receive anywhere from 0 to n-1 models.
std::vector<std::pair<int, int>> gossip_pairing(int n, Rng& rng);

// Closed-form bytes per round: CFL 2nB, DFL n(n-1)B, gossip nB, NFL 0.
int64_t comm_cost_model(Scenario scenario, int n, int64_t model_bytes);

struct LedgerEntry {
  int round = 0;  // 1-based
  int sender = 0;
  int receiver = 0;
  int64_t bytes = 0;
};

struct CommLedger {
  std::vector<LedgerEntry> entries;

  int64_t round_total(int round) const;
  int64_t total() const;
  std::string to_csv() const;
};

struct MetricsRow {
  int round = 0;  // 1-based
  int entity = 0;
  bool global_scope = false;
  ConfusionCounts counts;
  ClassificationMetrics metrics;
};

std::string metrics_to_jsonl(const std::vector<MetricsRow>& rows);

struct ScenarioConfig {
  Scenario scenario = Scenario::DFL_GOSSIP;
  ModelKind model = ModelKind::dt;
  int rounds = 20;
  int batch_size = 153;
  int pca_k = 22;
  uint64_t seed = 1;
  ValidationSource validation_source = ValidationSource::local;
  int threads = 0;  // 0 = OpenMP default
  SgdHyper sgd;
  HoeffdingConfig tree;
  int forest_trees = 10;
  int forest_cap = 10;

  void validate() const;
};

struct NodeState {
  int entity_id = -1;
  Model model;
  std::vector<std::pair<int, std::string>> inbox;  // (sender, serialized model)
};

struct RunOutputs {
  std::vector<MetricsRow> metrics;
  CommLedger ledger;
  std::vector<std::string> final_models;  // serialized, indexed by entity
};

// Round engine: train -> share -> aggregate -> evaluate, with a delivery
// barrier between phases. Node work runs under OpenMP; results are
// independent of the thread count.
class Engine {
 public:
  Engine(const ScenarioConfig& config, const DatasetSplit& split, const Standardizer& st,
         const PcaModel& pca);

  void step();
  bool done() const { return round_ >= config_.rounds; }
  int rounds_completed() const { return round_; }

  const std::vector<NodeState>& node_states() const { return nodes_; }
  const CommLedger& ledger() const { return ledger_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }
  std::vector<std::string> serialized_models() const;

 private:
  struct NodeData {
    std::vector<std::vector<double>> train_xs;
    std::vector<int> train_ys;
    std::vector<std::vector<double>> val_xs;
    std::vector<int> val_ys;
    BatchSchedule schedule;
  };

  void train_phase();
  void share_phase();
  void aggregate_phase();
  void eval_phase();
  void aggregate_node(size_t i);
  Model server_aggregate(const std::vector<std::pair<int, std::string>>& uploads) const;
  const NodeData& data(size_t i) const { return data_[i]; }

  ScenarioConfig config_;
  Topology topology_;
  int threads_ = 0;
  int round_ = 0;
  std::vector<NodeState> nodes_;
  std::vector<NodeData> data_;
  std::vector<std::vector<double>> global_xs_;
  std::vector<int> global_ys_;
  CommLedger ledger_;
  std::vector<MetricsRow> metrics_;
};

RunOutputs run_scenario(const ScenarioConfig& config, const DatasetSplit& split,
                        const Standardizer& st, const PcaModel& pca);

}  // namespace fedflow
