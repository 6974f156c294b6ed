#pragma once

#include <vector>

#include "fedflow/federation.hpp"

namespace fedflow {

struct SweepRow {
  int k = 0;
  ModelKind model = ModelKind::svm;
  int entity = 0;
  double accuracy = 0;  // final-round global-validation accuracy
};

struct SweepStat {
  int k = 0;
  double mean_accuracy = 0;   // over entities and algorithms
  double entity_stddev = 0;   // over per-entity means (algorithms averaged first)
  double norm_mean = 0;       // min-max normalized across the sweep
  double norm_stddev = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepStat> stats;
  int selected_k = 0;
};

// One full scenario run per (k, algorithm), everything else fixed. The
// selected k maximizes mean accuracy (rounded to 3 decimals), breaking ties
// by lower inter-entity spread, then by smaller k.
SweepResult sweep_components(const std::vector<int>& ks, const ScenarioConfig& base,
                             const DatasetSplit& split, const Standardizer& st,
                             const PcaModel& pca);

// Recomputes the per-k statistics from rows (also used by tests to check
// the emitted table against the selection).
std::vector<SweepStat> sweep_statistics(const std::vector<SweepRow>& rows);
int sweep_select_k(const std::vector<SweepStat>& stats);

}  // namespace fedflow
