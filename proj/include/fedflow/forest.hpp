#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedflow/hoeffding.hpp"
#include "fedflow/rng.hpp"

namespace fedflow {

// One ensemble member. The feature mask and replication stream travel with
// the tree when ensembles are exchanged and pruned.
struct ForestTree {
  HoeffdingTree tree;
  std::vector<int> mask;
  uint64_t rng_state = 0;
};

struct ForestConfig {
  int n_trees = 10;
  int cap = 10;  // ensemble size limit after aggregation
  HoeffdingConfig tree;
};

// Online random forest: Poisson(1) replication per tree per sample (online
// bagging), each tree restricted to a random ceil(sqrt(dim))-feature subset.
class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(int n_trees, int dim, const ForestConfig& config, uint64_t seed);

  void learn_one(std::span<const double> x, int y);
  int predict(std::span<const double> x) const;  // majority vote, tie -> benign

  int dim() const { return dim_; }
  int cap() const { return cap_; }
  void set_cap(int cap) { cap_ = cap; }
  const std::vector<ForestTree>& trees() const { return trees_; }
  std::vector<ForestTree>& trees() { return trees_; }

 private:
  int dim_ = 0;
  int cap_ = 0;
  std::vector<ForestTree> trees_;
};

}  // namespace fedflow
