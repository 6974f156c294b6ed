#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedflow/metrics.hpp"

namespace fedflow {

// Data-parallel inner loops used by preprocessing and evaluation. Each kernel
// has a straight-line serial reference and an OpenMP version; the parallel
// versions are written so the result is independent of the thread count
// (integer reductions, or fixed-size blocks combined in block order).

std::vector<double> column_means(const std::vector<std::vector<double>>& rows);

// Sample covariance (denominator n-1), d*d row-major.
std::vector<double> covariance_serial(const std::vector<std::vector<double>>& rows,
                                      const std::vector<double>& means);
std::vector<double> covariance_blocked(const std::vector<std::vector<double>>& rows,
                                       const std::vector<double>& means);

// Confusion counts of a predictor over a labelled set.
template <typename PredictFn>
ConfusionCounts eval_confusion_serial(const std::vector<std::vector<double>>& xs,
                                      std::span<const int> ys, PredictFn&& predict) {
  ConfusionCounts c;
  for (size_t i = 0; i < xs.size(); ++i) {
    const int p = predict(xs[i]);
    if (ys[i] == 1) {
      if (p == 1)
        ++c.tp;
      else
        ++c.fn;
    } else {
      if (p == 1)
        ++c.fp;
      else
        ++c.tn;
    }
  }
  return c;
}

template <typename PredictFn>
ConfusionCounts eval_confusion_parallel(const std::vector<std::vector<double>>& xs,
                                        std::span<const int> ys, PredictFn&& predict) {
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  const auto n = static_cast<int64_t>(xs.size());
#pragma omp parallel for schedule(static) reduction(+ : tp, fp, tn, fn)
  for (int64_t i = 0; i < n; ++i) {
    const int p = predict(xs[static_cast<size_t>(i)]);
    if (ys[static_cast<size_t>(i)] == 1) {
      if (p == 1)
        ++tp;
      else
        ++fn;
    } else {
      if (p == 1)
        ++fp;
      else
        ++tn;
    }
  }
  return ConfusionCounts{tp, fp, tn, fn};
}

}  // namespace fedflow
