// Compares the serial reference kernels against their OpenMP versions and
// times a full federation round at 1 thread vs all cores.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fedflow/federation.hpp"
#include "fedflow/kernels.hpp"
#include "fedflow/linear.hpp"
#include "fedflow/rng.hpp"
#include "fedflow/storage.hpp"
#include "fedflow/synth.hpp"

using namespace fedflow;

namespace {

double time_ms(const std::function<void()>& fn, int repeats = 3) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %8.2f ms   parallel %8.2f ms   speedup %5.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

std::vector<std::vector<double>> random_rows(size_t n, size_t d, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows)
    for (auto& v : row) v = rng.normal();
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  size_t n_rows = 200000;
  size_t dim = 28;
  if (argc > 1) n_rows = static_cast<size_t>(std::stoll(argv[1]));
  if (argc > 2) dim = static_cast<size_t>(std::stoll(argv[2]));
  const int max_threads = omp_get_max_threads();
  std::printf("rows=%zu dim=%zu threads=%d\n\n", n_rows, dim, max_threads);

  // covariance accumulation
  {
    auto rows = random_rows(n_rows, dim, 1);
    auto means = column_means(rows);
    volatile double sink = 0;
    const double serial =
        time_ms([&] { sink = covariance_serial(rows, means)[0] + sink * 0; });
    omp_set_num_threads(max_threads);
    const double parallel =
        time_ms([&] { sink = covariance_blocked(rows, means)[0] + sink * 0; });
    report("covariance", serial, parallel);
  }

  // validation evaluation with a linear model
  {
    auto rows = random_rows(n_rows, dim, 2);
    std::vector<int> ys(rows.size());
    Rng rng(3);
    for (auto& y : ys) y = static_cast<int>(rng.below(2));
    LinearModelParams model = linear_init(static_cast<int>(dim), LossKind::hinge);
    Rng wrng(4);
    for (auto& w : model.weights) w = wrng.normal();
    auto predict = [&](const std::vector<double>& x) { return linear_predict(model, x); };
    volatile int64_t sink = 0;
    const double serial = time_ms([&] { sink = eval_confusion_serial(rows, ys, predict).tp; });
    const double parallel =
        time_ms([&] { sink = eval_confusion_parallel(rows, ys, predict).tp; });
    (void)sink;
    report("confusion evaluation", serial, parallel);
  }

  // one gossip round of per-node forest training, 1 thread vs all
  {
    SyntheticSpec spec;
    spec.dimension = 8;
    const int entities = 8;
    for (int e = 0; e < entities; ++e) {
      SyntheticEntitySpec ent;
      ent.name = "e" + std::to_string(e);
      GaussianCluster benign{std::vector<double>(8, 0.0), 0.5, 3000, 0};
      GaussianCluster attack{std::vector<double>(8, 0.0), 0.5, 3000, 1};
      attack.center[static_cast<size_t>(e)] = 4.0;
      ent.clusters = {benign, attack};
      spec.entities.push_back(std::move(ent));
    }
    auto per_entity = generate_synthetic(spec, 7);
    std::vector<std::string> names;
    for (const auto& e : spec.entities) names.push_back(e.name);
    auto prepared = prepare_pipeline(per_entity, names, 0.10, 0.10, 7);

    ScenarioConfig cfg;
    cfg.scenario = Scenario::DFL_GOSSIP;
    cfg.model = ModelKind::rf;
    cfg.rounds = 2;
    cfg.batch_size = 800;
    cfg.pca_k = 8;
    cfg.tree.grace_period = 50;

    auto run_with = [&](int threads) {
      ScenarioConfig c = cfg;
      c.threads = threads;
      run_scenario(c, prepared.split, prepared.standardizer, prepared.pca);
    };
    const double serial = time_ms([&] { run_with(1); }, 1);
    const double parallel = time_ms([&] { run_with(max_threads); }, 1);
    report("gossip round (8 nodes, rf)", serial, parallel);
  }
  return 0;
}
