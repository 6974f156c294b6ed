#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fedflow {

enum class LossKind { hinge, log_loss };

// Hyperplane parameters shared between peers: weight vector and bias.
struct LinearModelParams {
  LossKind loss = LossKind::hinge;
  std::vector<double> weights;
  double bias = 0.0;
  uint64_t steps = 0;  // samples consumed, drives the decaying schedule
};

enum class LrSchedule { constant, inv_scaling };  // eta0 or eta0/(1+l2*t)

struct SgdHyper {
  double eta0 = 0.01;
  LrSchedule schedule = LrSchedule::constant;
  double l2 = 1e-4;
  int epochs_per_batch = 1;
};

// All-zero cold start, identical for every entity.
LinearModelParams linear_init(int dim, LossKind loss);

// One or more SGD passes over the batch in order. Hinge: subgradient step on
// margin violations plus L2 shrinkage; log loss: w -= eta*((sigma(z)-y)x + l2*w).
// Returns the updated copy; the input is untouched.
LinearModelParams linear_partial_fit(const LinearModelParams& params,
                                     const std::vector<std::vector<double>>& xs,
                                     std::span<const int> ys, const SgdHyper& hyper);

double linear_decision(const LinearModelParams& params, std::span<const double> x);
int linear_predict(const LinearModelParams& params, std::span<const double> x);  // tie -> benign
double lr_probability(const LinearModelParams& params, std::span<const double> x);

double sigmoid(double z);

}  // namespace fedflow
