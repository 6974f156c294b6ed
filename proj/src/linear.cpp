#include "fedflow/linear.hpp"

#include <cmath>

#include "fedflow/errors.hpp"

namespace fedflow {

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LinearModelParams linear_init(int dim, LossKind loss) {
  if (dim < 1) throw ModelError("linear_init: dimension must be >= 1");
  LinearModelParams p;
  p.loss = loss;
  p.weights.assign(static_cast<size_t>(dim), 0.0);
  return p;
}

namespace {

void check_sample(const LinearModelParams& params, std::span<const double> x) {
  if (x.size() != params.weights.size()) throw ModelError("linear model: dimension mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw ModelError("linear model: non-finite feature value");
}

}  // namespace

LinearModelParams linear_partial_fit(const LinearModelParams& params,
                                     const std::vector<std::vector<double>>& xs,
                                     std::span<const int> ys, const SgdHyper& hyper) {
  if (xs.size() != ys.size()) throw ModelError("linear_partial_fit: batch length mismatch");
  if (hyper.eta0 <= 0) throw ConfigError("linear_partial_fit: eta0 must be positive");
  if (hyper.l2 < 0) throw ConfigError("linear_partial_fit: l2 must be non-negative");
  if (hyper.epochs_per_batch < 1) throw ConfigError("linear_partial_fit: epochs must be >= 1");

  LinearModelParams p = params;
  const size_t d = p.weights.size();
  for (int epoch = 0; epoch < hyper.epochs_per_batch; ++epoch) {
    for (size_t i = 0; i < xs.size(); ++i) {
      const auto& x = xs[i];
      check_sample(p, x);
      double eta = hyper.eta0;
      if (hyper.schedule == LrSchedule::inv_scaling)
        eta = hyper.eta0 / (1.0 + hyper.l2 * static_cast<double>(p.steps));

      double z = p.bias;
      for (size_t j = 0; j < d; ++j) z += p.weights[j] * x[j];

      if (p.loss == LossKind::hinge) {
        const double y = ys[i] == 1 ? 1.0 : -1.0;
        const bool violates = y * z < 1.0;
        for (size_t j = 0; j < d; ++j) {
          double grad = hyper.l2 * p.weights[j];
          if (violates) grad -= y * x[j];
          p.weights[j] -= eta * grad;
        }
        if (violates) p.bias += eta * y;
      } else {
        const double y = ys[i] == 1 ? 1.0 : 0.0;
        const double err = sigmoid(z) - y;
        for (size_t j = 0; j < d; ++j)
          p.weights[j] -= eta * (err * x[j] + hyper.l2 * p.weights[j]);
        p.bias -= eta * err;
      }
      ++p.steps;
    }
  }
  return p;
}

double linear_decision(const LinearModelParams& params, std::span<const double> x) {
  check_sample(params, x);
  double z = params.bias;
  for (size_t j = 0; j < x.size(); ++j) z += params.weights[j] * x[j];
  return z;
}

int linear_predict(const LinearModelParams& params, std::span<const double> x) {
  return linear_decision(params, x) > 0.0 ? 1 : 0;
}

double lr_probability(const LinearModelParams& params, std::span<const double> x) {
  return sigmoid(linear_decision(params, x));
}

}  // namespace fedflow
