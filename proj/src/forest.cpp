#include "fedflow/forest.hpp"

#include <algorithm>
#include <cmath>

#include "fedflow/errors.hpp"

namespace fedflow {

ForestModel::ForestModel(int n_trees, int dim, const ForestConfig& config, uint64_t seed) {
  if (n_trees < 1) throw ModelError("forest: tree count must be >= 1");
  if (dim < 1) throw ModelError("forest: dimension must be >= 1");
  dim_ = dim;
  cap_ = std::max(config.cap, 1);

  const auto mask_size = static_cast<size_t>(
      std::ceil(std::sqrt(static_cast<double>(dim))));
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(derive_stream(seed, "forest.tree", static_cast<uint64_t>(t)));

    std::vector<int> all(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) all[static_cast<size_t>(j)] = j;
    rng.shuffle(all);
    std::vector<int> mask(all.begin(), all.begin() + static_cast<long>(std::min(mask_size, all.size())));
    std::sort(mask.begin(), mask.end());

    HoeffdingConfig tree_cfg = config.tree;
    tree_cfg.allowed_features = mask;

    ForestTree member;
    member.tree = HoeffdingTree(dim, tree_cfg);
    member.mask = std::move(mask);
    member.rng_state = rng.state();
    trees_.push_back(std::move(member));
  }
}

void ForestModel::learn_one(std::span<const double> x, int y) {
  for (auto& member : trees_) {
    Rng rng(0);
    rng.set_state(member.rng_state);
    const int m = rng.poisson1();
    member.rng_state = rng.state();
    for (int i = 0; i < m; ++i) member.tree.learn_one(x, y);
  }
}

int ForestModel::predict(std::span<const double> x) const {
  if (trees_.empty()) throw ModelError("forest: empty ensemble");
  int malicious = 0;
  for (const auto& member : trees_)
    if (member.tree.predict(x) == 1) ++malicious;
  return 2 * malicious > static_cast<int>(trees_.size()) ? 1 : 0;
}

}  // namespace fedflow
