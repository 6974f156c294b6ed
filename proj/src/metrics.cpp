#include "fedflow/metrics.hpp"

#include "fedflow/errors.hpp"

namespace fedflow {

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size())
    throw DataError("confusion: predictions and labels differ in length");
  if (predictions.empty()) throw DataError("confusion: empty input");
  ConfusionCounts c;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] == 1) {
      if (predictions[i] == 1)
        ++c.tp;
      else
        ++c.fn;
    } else {
      if (predictions[i] == 1)
        ++c.fp;
      else
        ++c.tn;
    }
  }
  return c;
}

ClassificationMetrics compute_metrics(const ConfusionCounts& c) {
  const int64_t total = c.total();
  if (total <= 0) throw DataError("compute_metrics: zero total");
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
  m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  const int64_t f1_den = 2 * c.tp + c.fp + c.fn;
  m.f1 = f1_den > 0 ? static_cast<double>(2 * c.tp) / static_cast<double>(f1_den) : 0.0;
  return m;
}

}  // namespace fedflow
