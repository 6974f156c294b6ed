#include "fedflow/hoeffding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedflow/errors.hpp"

namespace fedflow {

namespace {

constexpr double kMinGain = 1e-10;
constexpr double kMinMass = 1e-9;

double entropy_bits(double w0, double w1) {
  const double total = w0 + w1;
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (double w : {w0, w1}) {
    if (w <= 0) continue;
    const double p = w / total;
    h -= p * std::log2(p);
  }
  return h;
}

double normal_pdf(double a) { return std::exp(-0.5 * a * a) / std::sqrt(2.0 * 3.14159265358979323846); }

}  // namespace

double hoeffding_bound(double value_range, double delta, int64_t n) {
  if (value_range < 0) throw ModelError("hoeffding_bound: range must be non-negative");
  if (delta <= 0 || delta > 1) throw ModelError("hoeffding_bound: delta must lie in (0,1]");
  if (n < 1) throw ModelError("hoeffding_bound: n must be >= 1");
  return std::sqrt(value_range * value_range * std::log(1.0 / delta) /
                   (2.0 * static_cast<double>(n)));
}

void GaussianStat::add(double x, double w) {
  weight += w;
  const double delta = x - mean;
  mean += (w / weight) * delta;
  m2 += w * delta * (x - mean);
}

double GaussianStat::stddev() const {
  const double v = variance();
  return v > 0 ? std::sqrt(v) : 0.0;
}

double GaussianStat::cdf(double x) const {
  const double sd = stddev();
  if (sd <= 0) return x >= mean ? 1.0 : 0.0;
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

HoeffdingTree::HoeffdingTree(int dim, HoeffdingConfig config)
    : dim_(dim), config_(std::move(config)) {
  if (dim < 1) throw ModelError("hoeffding tree: dimension must be >= 1");
  TreeNode root;
  root.leaf.gauss[0].resize(static_cast<size_t>(dim));
  root.leaf.gauss[1].resize(static_cast<size_t>(dim));
  root.leaf.fmin.assign(static_cast<size_t>(dim), std::numeric_limits<double>::max());
  root.leaf.fmax.assign(static_cast<size_t>(dim), std::numeric_limits<double>::lowest());
  nodes_.push_back(std::move(root));
}

bool HoeffdingTree::feature_allowed(int f) const {
  if (config_.allowed_features.empty()) return true;
  return std::find(config_.allowed_features.begin(), config_.allowed_features.end(), f) !=
         config_.allowed_features.end();
}

size_t HoeffdingTree::route_leaf(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw ModelError("hoeffding tree: dimension mismatch");
  size_t idx = 0;
  while (!nodes_[idx].is_leaf()) {
    const auto& n = nodes_[idx];
    idx = static_cast<size_t>(x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return idx;
}

void HoeffdingTree::learn_one(std::span<const double> x, int y) {
  if (static_cast<int>(x.size()) != dim_) throw ModelError("hoeffding tree: dimension mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw ModelError("hoeffding tree: non-finite feature value");
  if (y != 0 && y != 1) throw ModelError("hoeffding tree: label must be 0 or 1");

  const size_t idx = route_leaf(x);
  auto& leaf = nodes_[idx].leaf;
  ++leaf.obs[y];
  ++leaf.since_check;
  ++samples_seen_;
  for (size_t j = 0; j < x.size(); ++j) {
    leaf.gauss[y][j].add(x[j]);
    leaf.fmin[j] = std::min(leaf.fmin[j], x[j]);
    leaf.fmax[j] = std::max(leaf.fmax[j], x[j]);
  }

  if (leaf.since_check >= config_.grace_period) {
    leaf.since_check = 0;
    try_split(idx);
  }
}

void HoeffdingTree::try_split(size_t node_idx) {
  auto& leaf = nodes_[node_idx].leaf;
  const int64_t n_obs = leaf.obs[0] + leaf.obs[1];
  if (n_obs < 1) return;

  const double w0 = leaf.class_weight(0);
  const double w1 = leaf.class_weight(1);
  const double total = w0 + w1;
  if (w0 <= 0 || w1 <= 0) return;  // pure leaf, zero gain everywhere

  const double parent_entropy = entropy_bits(w0, w1);

  // Best candidate per feature, then best/second-best across features.
  double best_gain = 0.0, second_gain = 0.0;
  int best_feature = -1;
  double best_threshold = 0.0;

  for (int f = 0; f < dim_; ++f) {
    if (!feature_allowed(f)) continue;
    const auto uf = static_cast<size_t>(f);
    const double lo = leaf.fmin[uf];
    const double hi = leaf.fmax[uf];
    if (!(hi > lo)) continue;

    double feature_gain = 0.0;
    double feature_threshold = 0.0;
    bool feature_usable = false;
    for (int c = 1; c <= config_.candidates_per_feature; ++c) {
      const double tau =
          lo + (hi - lo) * static_cast<double>(c) /
                   static_cast<double>(config_.candidates_per_feature + 1);
      const double l0 = w0 * leaf.gauss[0][uf].cdf(tau);
      const double l1 = w1 * leaf.gauss[1][uf].cdf(tau);
      const double lw = l0 + l1;
      const double rw = total - lw;
      if (lw < kMinMass || rw < kMinMass) continue;
      const double gain = parent_entropy -
                          (lw / total) * entropy_bits(l0, l1) -
                          (rw / total) * entropy_bits(w0 - l0, w1 - l1);
      if (!feature_usable || gain > feature_gain) {
        feature_usable = true;
        feature_gain = gain;
        feature_threshold = tau;
      }
    }
    if (!feature_usable) continue;

    if (best_feature < 0 || feature_gain > best_gain) {
      second_gain = best_feature < 0 ? 0.0 : best_gain;
      best_gain = feature_gain;
      best_feature = f;
      best_threshold = feature_threshold;
    } else if (feature_gain > second_gain) {
      second_gain = feature_gain;
    }
  }

  if (best_feature < 0 || best_gain <= kMinGain) return;

  const double eps = hoeffding_bound(config_.value_range, config_.delta, n_obs);
  if (best_gain - second_gain > eps || eps < config_.tie_threshold)
    do_split(node_idx, best_feature, best_threshold);
}

void HoeffdingTree::do_split(size_t node_idx, int feature, double threshold) {
  const auto uf = static_cast<size_t>(feature);
  const LeafStats parent = nodes_[node_idx].leaf;  // copy; node is rewritten below

  TreeNode left, right;
  for (TreeNode* child : {&left, &right}) {
    child->leaf.gauss[0].resize(static_cast<size_t>(dim_));
    child->leaf.gauss[1].resize(static_cast<size_t>(dim_));
    child->leaf.fmin = parent.fmin;
    child->leaf.fmax = parent.fmax;
  }
  left.leaf.fmax[uf] = std::min(parent.fmax[uf], threshold);
  right.leaf.fmin[uf] = std::max(parent.fmin[uf], threshold);

  for (int c = 0; c < 2; ++c) {
    const auto uc = static_cast<size_t>(c);
    const double wc = parent.class_weight(c);
    const GaussianStat& g = parent.gauss[uc][uf];
    const double p_left = g.weight > 0 ? g.cdf(threshold) : 0.5;
    left.leaf.prior[uc] = wc * p_left;
    right.leaf.prior[uc] = wc * (1.0 - p_left);

    for (int j = 0; j < dim_; ++j) {
      const auto ujj = static_cast<size_t>(j);
      const GaussianStat& src = parent.gauss[uc][ujj];
      GaussianStat& gl = left.leaf.gauss[uc][ujj];
      GaussianStat& gr = right.leaf.gauss[uc][ujj];
      if (src.weight <= 0) continue;

      if (j != feature) {
        // other features keep the parent's moments, with mass split by the
        // class-level left fraction
        gl.weight = src.weight * p_left;
        gl.mean = src.mean;
        gl.m2 = src.m2 * p_left;
        gr.weight = src.weight * (1.0 - p_left);
        gr.mean = src.mean;
        gr.m2 = src.m2 * (1.0 - p_left);
        continue;
      }

      // split feature: truncated-normal moments on each side
      const double sd = src.stddev();
      if (sd <= 0) {
        if (src.mean <= threshold)
          gl = src;
        else
          gr = src;
        continue;
      }
      const double a = (threshold - src.mean) / sd;
      const double phi = normal_pdf(a);
      const double cdf = g.cdf(threshold);
      if (cdf > kMinMass) {
        const double lambda = phi / cdf;
        gl.weight = src.weight * cdf;
        gl.mean = src.mean - sd * lambda;
        const double var = sd * sd * std::max(0.0, 1.0 - a * lambda - lambda * lambda);
        gl.m2 = var * gl.weight;
      }
      const double q = 1.0 - cdf;
      if (q > kMinMass) {
        const double lambda = phi / q;
        gr.weight = src.weight * q;
        gr.mean = src.mean + sd * lambda;
        const double var = sd * sd * std::max(0.0, 1.0 + a * lambda - lambda * lambda);
        gr.m2 = var * gr.weight;
      }
    }
  }

  const int left_idx = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(left));
  nodes_.push_back(std::move(right));

  TreeNode& node = nodes_[node_idx];
  node.feature = feature;
  node.threshold = threshold;
  node.left = left_idx;
  node.right = left_idx + 1;
  node.leaf = LeafStats{};
}

int HoeffdingTree::predict(std::span<const double> x) const {
  const auto& leaf = nodes_[route_leaf(x)].leaf;
  if (leaf.obs[0] + leaf.obs[1] > 0) return leaf.obs[1] > leaf.obs[0] ? 1 : 0;
  return leaf.prior[1] > leaf.prior[0] ? 1 : 0;
}

double HoeffdingTree::accuracy(const std::vector<std::vector<double>>& xs,
                               std::span<const int> ys) const {
  if (xs.empty()) throw DataError("tree accuracy: empty validation set");
  if (xs.size() != ys.size()) throw DataError("tree accuracy: length mismatch");
  int64_t correct = 0;
  for (size_t i = 0; i < xs.size(); ++i)
    if (predict(xs[i]) == ys[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(xs.size());
}

size_t HoeffdingTree::leaf_count() const {
  size_t n = 0;
  for (const auto& node : nodes_)
    if (node.is_leaf()) ++n;
  return n;
}

double tree_accuracy(const HoeffdingTree& tree, const std::vector<std::vector<double>>& xs,
                     std::span<const int> ys) {
  return tree.accuracy(xs, ys);
}

}  // namespace fedflow
