#include "fedflow/aggregation.hpp"

#include <algorithm>

#include "fedflow/errors.hpp"
#include "fedflow/kernels.hpp"

namespace fedflow {

LinearModelParams aggregate_mean(const std::vector<LinearModelParams>& params_list) {
  if (params_list.empty()) throw ModelError("aggregate_mean: empty list");
  const auto& first = params_list.front();
  for (const auto& p : params_list) {
    if (p.loss != first.loss) throw ModelError("aggregate_mean: mixed loss kinds");
    if (p.weights.size() != first.weights.size())
      throw ModelError("aggregate_mean: dimension mismatch");
  }

  LinearModelParams mean;
  mean.loss = first.loss;
  mean.weights.assign(first.weights.size(), 0.0);
  uint64_t steps_sum = 0;
  for (const auto& p : params_list) {
    for (size_t j = 0; j < mean.weights.size(); ++j) mean.weights[j] += p.weights[j];
    mean.bias += p.bias;
    steps_sum += p.steps;
  }
  const auto n = static_cast<double>(params_list.size());
  for (double& w : mean.weights) w /= n;
  mean.bias /= n;
  mean.steps = steps_sum / params_list.size();
  return mean;
}

double evaluate_candidate(const Model& model, const std::vector<std::vector<double>>& val_xs,
                          std::span<const int> val_ys) {
  if (val_xs.empty()) throw DataError("evaluate_candidate: empty validation set");
  const auto c = eval_confusion_parallel(val_xs, val_ys,
                                         [&](const std::vector<double>& x) { return model_predict(model, x); });
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

HoeffdingTree select_best_tree(const CandidateSet& candidates,
                               const std::vector<std::vector<double>>& val_xs,
                               std::span<const int> val_ys) {
  if (candidates.models.empty()) throw ModelError("select_best_tree: no candidates");
  if (val_xs.empty()) throw DataError("select_best_tree: empty validation set");

  const HoeffdingTree* best = nullptr;
  double best_acc = -1.0;
  bool best_is_owner = false;
  int best_sender = 0;
  for (const auto& [sender, model] : candidates.models) {
    const auto* tree = std::get_if<HoeffdingTree>(&model);
    if (!tree) throw ModelError("select_best_tree: candidate is not a tree");
    const double acc = tree->accuracy(val_xs, val_ys);
    const bool is_owner = sender == candidates.owner_entity;
    const bool better =
        acc > best_acc ||
        (acc == best_acc && !best_is_owner && (is_owner || sender < best_sender));
    if (!best || better) {
      best = tree;
      best_acc = acc;
      best_is_owner = is_owner;
      best_sender = sender;
    }
  }
  return *best;
}

ForestModel flatten_and_prune(const std::vector<std::pair<int, const ForestModel*>>& forests,
                              const std::vector<std::vector<double>>& val_xs,
                              std::span<const int> val_ys, int cap) {
  if (forests.empty()) throw ModelError("flatten_and_prune: no forests");
  if (cap < 1) throw ConfigError("flatten_and_prune: cap must be >= 1");
  if (val_xs.empty()) throw DataError("flatten_and_prune: empty validation set");

  std::vector<const ForestTree*> pool;
  for (const auto& [sender, forest] : forests) {
    (void)sender;
    for (const auto& member : forest->trees()) pool.push_back(&member);
  }
  if (pool.empty()) throw ModelError("flatten_and_prune: empty tree pool");

  std::vector<double> scores(pool.size());
  for (size_t i = 0; i < pool.size(); ++i)
    scores[i] = pool[i]->tree.accuracy(val_xs, val_ys);

  // Retain the `cap` best (ties favour earlier pool position, i.e. the
  // owner's trees), but emit them in pool order.
  std::vector<size_t> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  const size_t keep = std::min(static_cast<size_t>(cap), order.size());
  std::vector<uint8_t> retained(pool.size(), 0);
  for (size_t i = 0; i < keep; ++i) retained[order[i]] = 1;

  ForestModel out;
  ForestConfig cfg;
  cfg.cap = cap;
  out = ForestModel(1, forests.front().second->dim(), cfg, 0);
  out.set_cap(cap);
  out.trees().clear();
  for (size_t i = 0; i < pool.size(); ++i)
    if (retained[i]) out.trees().push_back(*pool[i]);
  return out;
}

}  // namespace fedflow
