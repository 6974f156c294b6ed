#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fedflow/forest.hpp"
#include "fedflow/hoeffding.hpp"
#include "fedflow/linear.hpp"
#include "fedflow/model.hpp"

namespace fedflow {

// Pool of peer models under consideration at one node; the owner's own
// model comes first, then the received ones.
struct CandidateSet {
  int owner_entity = -1;
  std::vector<std::pair<int, Model>> models;  // (sender entity, model)
};

// Unweighted coordinate-wise mean of weights and bias.
LinearModelParams aggregate_mean(const std::vector<LinearModelParams>& params_list);

// Candidate with the highest validation accuracy; ties prefer the owner's
// own model, then the lowest sender id.
HoeffdingTree select_best_tree(const CandidateSet& candidates,
                               const std::vector<std::vector<double>>& val_xs,
                               std::span<const int> val_ys);

// Pools every tree from every forest, scores each on the validation set and
// retains the top `cap` in pool order (owner's trees first). Masks and
// replication streams travel with their trees.
ForestModel flatten_and_prune(const std::vector<std::pair<int, const ForestModel*>>& forests,
                              const std::vector<std::vector<double>>& val_xs,
                              std::span<const int> val_ys, int cap);

double evaluate_candidate(const Model& model, const std::vector<std::vector<double>>& val_xs,
                          std::span<const int> val_ys);

}  // namespace fedflow
