#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fedflow/errors.hpp"
#include "fedflow/federation.hpp"
#include "fedflow/storage.hpp"
#include "fedflow/synth.hpp"

namespace fs = std::filesystem;
using namespace fedflow;

namespace {

PreparedDataset small_prepared(uint64_t seed) {
  SyntheticSpec spec;
  spec.dimension = 3;
  for (int e = 0; e < 2; ++e) {
    SyntheticEntitySpec ent;
    ent.name = "e" + std::to_string(e);
    GaussianCluster benign;
    benign.center = {0.0, 0.0, 0.0};
    benign.sigma = 0.5;
    benign.count = 150;
    benign.label = 0;
    GaussianCluster attack = benign;
    attack.center[static_cast<size_t>(e)] = 3.0;
    attack.label = 1;
    ent.clusters = {benign, attack};
    spec.entities.push_back(std::move(ent));
  }
  auto per_entity = generate_synthetic(spec, seed);
  return prepare_pipeline(per_entity, {"e0", "e1"}, 0.10, 0.10, seed);
}

}  // namespace

TEST_CASE("prepared datasets round-trip through disk exactly") {
  const auto dir = fs::temp_directory_path() / "fedflow_storage_test";
  fs::remove_all(dir);

  auto original = small_prepared(71);
  save_prepared(dir, original, {}, 0);
  auto loaded = load_prepared(dir);

  REQUIRE(loaded.split.shards.size() == original.split.shards.size());
  for (size_t e = 0; e < original.split.shards.size(); ++e) {
    const auto& a = original.split.shards[e];
    const auto& b = loaded.split.shards[e];
    CHECK(b.provider_name == a.provider_name);
    REQUIRE(b.train.size() == a.train.size());
    REQUIRE(b.local_validation.size() == a.local_validation.size());
    for (size_t i = 0; i < a.train.size(); ++i) {
      CHECK(b.train[i].features == a.train[i].features);  // bitwise through to_chars
      CHECK(b.train[i].label == a.train[i].label);
      CHECK(b.train[i].source_row == a.train[i].source_row);
    }
  }
  REQUIRE(loaded.split.global_validation.size() == original.split.global_validation.size());
  for (size_t i = 0; i < original.split.global_validation.size(); ++i)
    CHECK(loaded.split.global_validation[i].features ==
          original.split.global_validation[i].features);

  CHECK(loaded.standardizer.means == original.standardizer.means);
  CHECK(loaded.standardizer.stddevs == original.standardizer.stddevs);
  CHECK(loaded.pca.components == original.pca.components);
  CHECK(loaded.pca.explained_variance == original.pca.explained_variance);

  // a run from the loaded dataset is byte-identical to one from memory
  ScenarioConfig cfg;
  cfg.scenario = Scenario::DFL_GOSSIP;
  cfg.model = ModelKind::rf;
  cfg.rounds = 3;
  cfg.batch_size = 30;
  cfg.pca_k = 3;
  cfg.seed = 5;
  cfg.tree.grace_period = 20;
  cfg.forest_trees = 3;
  cfg.forest_cap = 3;
  auto from_memory = run_scenario(cfg, original.split, original.standardizer, original.pca);
  auto from_disk = run_scenario(cfg, loaded.split, loaded.standardizer, loaded.pca);
  CHECK(metrics_to_jsonl(from_memory.metrics) == metrics_to_jsonl(from_disk.metrics));
  CHECK(from_memory.ledger.to_csv() == from_disk.ledger.to_csv());
  CHECK(from_memory.final_models == from_disk.final_models);
}

TEST_CASE("load_prepared flags missing or corrupt layouts") {
  const auto dir = fs::temp_directory_path() / "fedflow_storage_bad";
  fs::remove_all(dir);
  fs::create_directories(dir);
  CHECK_THROWS_AS(load_prepared(dir), DataError);
}

TEST_CASE("requesting more components than were fitted is a config error") {
  auto data = small_prepared(73);
  ScenarioConfig cfg;
  cfg.scenario = Scenario::NFL;
  cfg.model = ModelKind::svm;
  cfg.rounds = 1;
  cfg.batch_size = 10;
  cfg.pca_k = 9;  // fitted full rank is 3
  CHECK_THROWS_AS(Engine(cfg, data.split, data.standardizer, data.pca), ConfigError);
}
