#pragma once

#include <cstdint>
#include <span>

namespace fedflow {

// Positive class is malicious (label 1) everywhere.
struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

struct ClassificationMetrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// labels/predictions are 0 (benign) or 1 (malicious)
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels);

// A=(tp+tn)/total, P=tp/(tp+fp), R=tp/(tp+fn), F1=2tp/(2tp+fp+fn).
// Zero-denominator convention: the affected metric is 0.
ClassificationMetrics compute_metrics(const ConfusionCounts& c);

}  // namespace fedflow
