#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedflow {

// One DoH flow after feature extraction. Only the statistical feature
// columns live in `features`; transport metadata stays in the loader.
struct FlowRecord {
  std::vector<double> features;
  int label = 0;  // 1 = malicious, 0 = benign
  int entity_id = -1;
  int64_t source_row = -1;
};

struct EntityShard {
  int entity_id = -1;
  std::string provider_name;
  std::vector<FlowRecord> train;
  std::vector<FlowRecord> local_validation;
};

struct DatasetSplit {
  std::vector<EntityShard> shards;
  std::vector<FlowRecord> global_validation;
  uint64_t seed = 0;
};

// Per-round training batches for one entity; entries index into shard.train.
struct BatchSchedule {
  int entity_id = -1;
  int batch_size = 0;
  int rounds = 0;
  std::vector<std::vector<int>> batches;
};

// Global validation is drawn from the union of all entities before any
// per-entity split; local validation is then drawn per entity from what
// remains. Same seed, same membership.
DatasetSplit split_validation(const std::vector<std::vector<FlowRecord>>& per_entity,
                              const std::vector<std::string>& entity_names,
                              double global_fraction, double local_fraction, uint64_t seed);

// Stratified batches: each batch's malicious count tracks the train-set
// proportion within one sample. Consumes batch_size*rounds records without
// replacement in seeded shuffled order.
BatchSchedule make_batches(const EntityShard& shard, int batch_size, int rounds, uint64_t seed);

}  // namespace fedflow
