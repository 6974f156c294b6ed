#include "fedflow/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fedflow/errors.hpp"

namespace fedflow {

SweepResult sweep_components(const std::vector<int>& ks, const ScenarioConfig& base,
                             const DatasetSplit& split, const Standardizer& st,
                             const PcaModel& pca) {
  if (ks.empty()) throw ConfigError("sweep: empty component range");
  for (int k : ks)
    if (k < 1 || k > pca.k)
      throw ConfigError("sweep: k=" + std::to_string(k) + " outside [1," + std::to_string(pca.k) + "]");

  SweepResult result;
  const ModelKind kinds[] = {ModelKind::svm, ModelKind::lr, ModelKind::dt, ModelKind::rf};
  for (int k : ks) {
    for (ModelKind kind : kinds) {
      ScenarioConfig cfg = base;
      cfg.pca_k = k;
      cfg.model = kind;
      const auto out = run_scenario(cfg, split, st, pca);
      for (const auto& row : out.metrics) {
        if (row.round != cfg.rounds || !row.global_scope) continue;
        result.rows.push_back({k, kind, row.entity, row.metrics.accuracy});
      }
    }
  }
  result.stats = sweep_statistics(result.rows);
  result.selected_k = sweep_select_k(result.stats);
  return result;
}

std::vector<SweepStat> sweep_statistics(const std::vector<SweepRow>& rows) {
  std::set<int> ks;
  for (const auto& r : rows) ks.insert(r.k);

  std::vector<SweepStat> stats;
  for (int k : ks) {
    SweepStat st;
    st.k = k;
    double sum = 0;
    int count = 0;
    std::map<int, std::pair<double, int>> per_entity;  // entity -> (sum, count)
    for (const auto& r : rows) {
      if (r.k != k) continue;
      sum += r.accuracy;
      ++count;
      auto& [esum, ecount] = per_entity[r.entity];
      esum += r.accuracy;
      ++ecount;
    }
    st.mean_accuracy = sum / count;

    std::vector<double> entity_means;
    for (const auto& [entity, acc] : per_entity)
      entity_means.push_back(acc.first / acc.second);
    double var = 0;
    double emean = 0;
    for (double m : entity_means) emean += m;
    emean /= static_cast<double>(entity_means.size());
    for (double m : entity_means) var += (m - emean) * (m - emean);
    st.entity_stddev = std::sqrt(var / static_cast<double>(entity_means.size()));
    stats.push_back(st);
  }

  double lo_mean = stats.front().mean_accuracy, hi_mean = lo_mean;
  double lo_sd = stats.front().entity_stddev, hi_sd = lo_sd;
  for (const auto& st : stats) {
    lo_mean = std::min(lo_mean, st.mean_accuracy);
    hi_mean = std::max(hi_mean, st.mean_accuracy);
    lo_sd = std::min(lo_sd, st.entity_stddev);
    hi_sd = std::max(hi_sd, st.entity_stddev);
  }
  for (auto& st : stats) {
    st.norm_mean = hi_mean > lo_mean ? (st.mean_accuracy - lo_mean) / (hi_mean - lo_mean) : 0.0;
    st.norm_stddev = hi_sd > lo_sd ? (st.entity_stddev - lo_sd) / (hi_sd - lo_sd) : 0.0;
  }
  return stats;
}

int sweep_select_k(const std::vector<SweepStat>& stats) {
  if (stats.empty()) throw ConfigError("sweep: no statistics");
  auto key = [](const SweepStat& st) {
    return std::make_tuple(-std::round(st.mean_accuracy * 1000.0),
                           std::round(st.entity_stddev * 1000.0), st.k);
  };
  const SweepStat* best = &stats.front();
  for (const auto& st : stats)
    if (key(st) < key(*best)) best = &st;
  return best->k;
}

}  // namespace fedflow
