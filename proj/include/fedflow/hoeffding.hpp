#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fedflow {

// epsilon = sqrt(R^2 * ln(1/delta) / (2N)); the confidence radius that
// licenses a split decision after N samples.
double hoeffding_bound(double value_range, double delta, int64_t n);

struct HoeffdingConfig {
  double delta = 1e-7;
  int grace_period = 200;
  double tie_threshold = 0.05;
  double value_range = 1.0;  // log2(2) for binary information gain
  int candidates_per_feature = 10;
  std::vector<int> allowed_features;  // empty = all features
};

// Weighted Welford accumulator; doubles as the per-class per-feature
// Gaussian estimator at each leaf.
struct GaussianStat {
  double weight = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x, double w = 1.0);
  double variance() const { return weight > 0 ? m2 / weight : 0.0; }
  double stddev() const;
  // P(X <= x) under the fitted normal; a step function when variance is 0.
  double cdf(double x) const;
};

struct LeafStats {
  int64_t obs[2] = {0, 0};     // samples routed here since creation
  double prior[2] = {0, 0};    // class mass inherited from the parent at split time
  std::vector<GaussianStat> gauss[2];
  std::vector<double> fmin;
  std::vector<double> fmax;
  int64_t since_check = 0;

  double class_weight(int c) const { return prior[c] + static_cast<double>(obs[c]); }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  LeafStats leaf;

  bool is_leaf() const { return feature < 0; }
};

// Incremental decision tree: leaves accumulate class counts and Gaussian
// statistics; a leaf splits once the best candidate's gain beats the
// second-best feature's by the Hoeffding bound (or the bound falls below
// the tie threshold). Fresh leaves are seeded with the parent's statistics
// partitioned analytically at the threshold.
class HoeffdingTree {
 public:
  HoeffdingTree() = default;
  HoeffdingTree(int dim, HoeffdingConfig config);

  void learn_one(std::span<const double> x, int y);
  int predict(std::span<const double> x) const;  // ties resolve to benign
  double accuracy(const std::vector<std::vector<double>>& xs, std::span<const int> ys) const;

  size_t route_leaf(std::span<const double> x) const;

  int dim() const { return dim_; }
  const HoeffdingConfig& config() const { return config_; }
  HoeffdingConfig& config() { return config_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }
  size_t leaf_count() const;
  int64_t samples_seen() const { return samples_seen_; }
  void set_samples_seen(int64_t n) { samples_seen_ = n; }

 private:
  void try_split(size_t node_idx);
  void do_split(size_t node_idx, int feature, double threshold);
  bool feature_allowed(int f) const;

  int dim_ = 0;
  HoeffdingConfig config_;
  std::vector<TreeNode> nodes_;
  int64_t samples_seen_ = 0;
};

double tree_accuracy(const HoeffdingTree& tree, const std::vector<std::vector<double>>& xs,
                     std::span<const int> ys);

}  // namespace fedflow
