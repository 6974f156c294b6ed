#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fedflow/csv.hpp"
#include "fedflow/dataset.hpp"
#include "fedflow/features.hpp"

namespace fedflow {

// Prepared-run inputs: the split plus the preprocessing fitted once on the
// union of the entity training sets (full-rank, so any pca_k <= dim can be
// chosen at run time without refitting).
struct PreparedDataset {
  DatasetSplit split;
  Standardizer standardizer;
  PcaModel pca;
};

PreparedDataset prepare_pipeline(const std::vector<std::vector<FlowRecord>>& per_entity,
                                 const std::vector<std::string>& entity_names,
                                 double global_fraction, double local_fraction, uint64_t seed);

// On-disk layout under `dir`:
//   dataset.json                  counts and entity table
//   preprocess.json               standardizer + PCA
//   shards/entity_<id>_train.csv
//   shards/entity_<id>_val.csv
//   global_val.csv
void save_prepared(const std::filesystem::path& dir, const PreparedDataset& data,
                   const std::vector<PartitionCounts>& source_counts, int64_t discarded);

PreparedDataset load_prepared(const std::filesystem::path& dir);

}  // namespace fedflow
