#include "fedflow/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fedflow/errors.hpp"
#include "fedflow/rng.hpp"

namespace fedflow {

DatasetSplit split_validation(const std::vector<std::vector<FlowRecord>>& per_entity,
                              const std::vector<std::string>& entity_names,
                              double global_fraction, double local_fraction, uint64_t seed) {
  if (global_fraction <= 0 || global_fraction >= 1 || local_fraction <= 0 || local_fraction >= 1)
    throw ConfigError("split_validation: fractions must lie in (0,1)");
  if (per_entity.empty()) throw DataError("split_validation: no entities");
  if (entity_names.size() != per_entity.size())
    throw ConfigError("split_validation: entity name count mismatch");

  int64_t total = 0;
  for (const auto& recs : per_entity) total += static_cast<int64_t>(recs.size());
  if (total == 0) throw DataError("split_validation: no records");

  const auto n_global = static_cast<size_t>(std::llround(global_fraction * static_cast<double>(total)));

  // Uniform global draw over (entity, index) pairs in entity-major order.
  std::vector<std::pair<int, int>> pool;
  pool.reserve(static_cast<size_t>(total));
  for (size_t e = 0; e < per_entity.size(); ++e)
    for (size_t i = 0; i < per_entity[e].size(); ++i)
      pool.emplace_back(static_cast<int>(e), static_cast<int>(i));

  Rng global_rng(derive_stream(seed, "split.global"));
  global_rng.shuffle(pool);

  DatasetSplit split;
  split.seed = seed;
  std::vector<std::unordered_set<int>> in_global(per_entity.size());
  for (size_t i = 0; i < n_global && i < pool.size(); ++i) {
    auto [e, idx] = pool[i];
    FlowRecord rec = per_entity[static_cast<size_t>(e)][static_cast<size_t>(idx)];
    rec.entity_id = e;
    split.global_validation.push_back(std::move(rec));
    in_global[static_cast<size_t>(e)].insert(idx);
  }

  for (size_t e = 0; e < per_entity.size(); ++e) {
    EntityShard shard;
    shard.entity_id = static_cast<int>(e);
    shard.provider_name = entity_names[e];

    std::vector<int> remaining;
    for (size_t i = 0; i < per_entity[e].size(); ++i)
      if (!in_global[e].count(static_cast<int>(i))) remaining.push_back(static_cast<int>(i));

    const auto n_local =
        static_cast<size_t>(std::llround(local_fraction * static_cast<double>(remaining.size())));
    std::vector<int> order = remaining;
    Rng local_rng(derive_stream(seed, "split.local", e));
    local_rng.shuffle(order);

    std::unordered_set<int> in_local(order.begin(), order.begin() + static_cast<long>(std::min(n_local, order.size())));
    for (int idx : remaining) {
      FlowRecord rec = per_entity[e][static_cast<size_t>(idx)];
      rec.entity_id = static_cast<int>(e);
      if (in_local.count(idx))
        shard.local_validation.push_back(std::move(rec));
      else
        shard.train.push_back(std::move(rec));
    }
    if (shard.train.empty())
      throw DataError("split_validation: entity " + entity_names[e] +
                      " has an empty train set after splits");
    split.shards.push_back(std::move(shard));
  }
  return split;
}

BatchSchedule make_batches(const EntityShard& shard, int batch_size, int rounds, uint64_t seed) {
  if (batch_size < 1 || rounds < 1) throw ConfigError("make_batches: batch_size and rounds must be >= 1");
  const int64_t required = static_cast<int64_t>(batch_size) * rounds;
  const auto available = static_cast<int64_t>(shard.train.size());
  if (available < required)
    throw DataError("make_batches: insufficient samples for entity " + shard.provider_name +
                    ": required " + std::to_string(required) + ", available " +
                    std::to_string(available));

  std::vector<int> malicious, benign;
  for (size_t i = 0; i < shard.train.size(); ++i)
    (shard.train[i].label == 1 ? malicious : benign).push_back(static_cast<int>(i));

  Rng rng(derive_stream(seed, "batches", static_cast<uint64_t>(shard.entity_id)));
  rng.shuffle(malicious);
  rng.shuffle(benign);

  const double mal_ratio =
      static_cast<double>(malicious.size()) / static_cast<double>(shard.train.size());

  BatchSchedule sched;
  sched.entity_id = shard.entity_id;
  sched.batch_size = batch_size;
  sched.rounds = rounds;

  size_t mal_used = 0, ben_used = 0;
  int64_t quota_prev = 0;
  for (int r = 0; r < rounds; ++r) {
    const int64_t quota_cum =
        std::llround(static_cast<double>(r + 1) * batch_size * mal_ratio);
    auto want_mal = static_cast<size_t>(quota_cum - quota_prev);
    quota_prev = quota_cum;

    want_mal = std::min(want_mal, malicious.size() - mal_used);
    size_t want_ben = static_cast<size_t>(batch_size) - want_mal;
    if (want_ben > benign.size() - ben_used) {
      const size_t shortfall = want_ben - (benign.size() - ben_used);
      want_ben -= shortfall;
      want_mal += shortfall;
    }

    std::vector<int> batch;
    batch.reserve(static_cast<size_t>(batch_size));
    for (size_t i = 0; i < want_mal; ++i) batch.push_back(malicious[mal_used++]);
    for (size_t i = 0; i < want_ben; ++i) batch.push_back(benign[ben_used++]);
    rng.shuffle(batch);
    sched.batches.push_back(std::move(batch));
  }
  return sched;
}

}  // namespace fedflow
