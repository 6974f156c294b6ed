#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedflow/errors.hpp"
#include "fedflow/linear.hpp"
#include "fedflow/rng.hpp"
#include "test_support.hpp"

using namespace fedflow;

TEST_CASE("linear_init cold start") {
  auto p = linear_init(3, LossKind::hinge);
  CHECK(p.weights == std::vector<double>{0, 0, 0});
  CHECK(p.bias == 0.0);

  std::vector<double> x{1.0, -2.0, 0.5};
  CHECK(linear_decision(p, x) == 0.0);
  CHECK(linear_predict(p, x) == 0);  // tie resolves to benign

  auto p2 = linear_init(3, LossKind::hinge);
  CHECK(p2.weights == p.weights);
  CHECK(p2.bias == p.bias);

  CHECK_THROWS_AS(linear_init(0, LossKind::hinge), ModelError);
}

TEST_CASE("log-loss single step from the sigmoid midpoint") {
  auto p = linear_init(2, LossKind::log_loss);
  SgdHyper hyper;
  hyper.eta0 = 1.0;
  hyper.l2 = 0.0;
  auto updated = linear_partial_fit(p, {{0.0, 0.0}}, std::vector<int>{1}, hyper);
  CHECK(updated.bias == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(updated.weights == std::vector<double>{0, 0});
  CHECK(p.bias == 0.0);  // input untouched
}

TEST_CASE("hinge leaves satisfied margins alone") {
  LinearModelParams p = linear_init(2, LossKind::hinge);
  p.weights = {1.0, 0.0};
  p.bias = 0.0;
  SgdHyper hyper;
  hyper.l2 = 0.0;
  // y=+1, decision = 2 => margin 2 >= 1
  auto updated = linear_partial_fit(p, {{2.0, 3.0}}, std::vector<int>{1}, hyper);
  CHECK(updated.weights == p.weights);
  CHECK(updated.bias == p.bias);
}

TEST_CASE("hinge with zero l2 never updates on satisfied margins (property)") {
  Rng rng(5);
  SgdHyper hyper;
  hyper.l2 = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    LinearModelParams p = linear_init(3, LossKind::hinge);
    for (auto& w : p.weights) w = rng.normal();
    p.bias = rng.normal();
    std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
    const double z = linear_decision(p, x);
    const int y = z >= 0 ? 1 : 0;  // functional margin |z| with matching label
    if (std::abs(z) < 1.0) continue;
    auto updated = linear_partial_fit(p, {x}, std::vector<int>{y}, hyper);
    CHECK(updated.weights == p.weights);
    CHECK(updated.bias == p.bias);
  }
}

TEST_CASE("decision, prediction and probability") {
  LinearModelParams p = linear_init(2, LossKind::log_loss);
  p.weights = {1.0, 0.0};
  p.bias = -1.0;
  std::vector<double> x{3.0, 7.0};
  CHECK(linear_decision(p, x) == doctest::Approx(2.0));
  CHECK(linear_predict(p, x) == 1);
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(lr_probability(linear_init(2, LossKind::log_loss), x) == 0.5);

  // monotone in the decision value
  double prev = -1;
  for (double z = -5; z <= 5; z += 0.25) {
    const double s = sigmoid(z);
    CHECK(s > prev);
    prev = s;
  }

  std::vector<double> wrong_dim{1.0};
  CHECK_THROWS_AS(linear_decision(p, wrong_dim), ModelError);
  std::vector<double> non_finite{1.0, std::nan("")};
  CHECK_THROWS_AS(linear_partial_fit(p, {non_finite}, std::vector<int>{1}, SgdHyper{}),
                  ModelError);
}

TEST_CASE("log-loss gradient matches central finite differences") {
  Rng rng(99);
  const double l2 = 0.1;
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const size_t d = 4;
    std::vector<double> w(d), x(d);
    for (size_t j = 0; j < d; ++j) {
      w[j] = rng.normal();
      x[j] = rng.normal();
    }
    double b = rng.normal();
    const int y = static_cast<int>(rng.below(2));

    auto loss = [&](const std::vector<double>& wv, double bv) {
      double z = bv;
      for (size_t j = 0; j < d; ++j) z += wv[j] * x[j];
      const double p = sigmoid(z);
      double reg = 0;
      for (double v : wv) reg += v * v;
      return -(y * std::log(p) + (1 - y) * std::log(1 - p)) + 0.5 * l2 * reg;
    };

    // analytic gradient: (sigma(z)-y)x + l2*w, bias (sigma(z)-y)
    double z = b;
    for (size_t j = 0; j < d; ++j) z += w[j] * x[j];
    const double err = sigmoid(z) - y;
    for (size_t j = 0; j < d; ++j) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double numeric = (loss(wp, b) - loss(wm, b)) / (2 * h);
      const double analytic = err * x[j] + l2 * w[j];
      if (std::abs(numeric) > 1e-4) {
        CHECK(std::abs(analytic - numeric) / std::abs(numeric) <= 1e-5);
        ++checked;
      }
    }
    const double numeric_b = (loss(w, b + h) - loss(w, b - h)) / (2 * h);
    if (std::abs(numeric_b) > 1e-4)
      CHECK(std::abs(err - numeric_b) / std::abs(numeric_b) <= 1e-5);
  }
  CHECK(checked > 100);
}

TEST_CASE("partial_fit composes: two batches equal their concatenation") {
  auto stream = testsupport::two_gaussian_stream(200, 1.5, 0.8, 31, 3);
  std::vector<std::vector<double>> first(stream.xs.begin(), stream.xs.begin() + 100);
  std::vector<std::vector<double>> second(stream.xs.begin() + 100, stream.xs.end());
  std::vector<int> ys_first(stream.ys.begin(), stream.ys.begin() + 100);
  std::vector<int> ys_second(stream.ys.begin() + 100, stream.ys.end());

  for (auto schedule : {LrSchedule::constant, LrSchedule::inv_scaling}) {
    for (auto loss : {LossKind::hinge, LossKind::log_loss}) {
      SgdHyper hyper;
      hyper.schedule = schedule;
      auto p0 = linear_init(3, loss);
      auto chained = linear_partial_fit(linear_partial_fit(p0, first, ys_first, hyper), second,
                                        ys_second, hyper);
      auto joint = linear_partial_fit(p0, stream.xs, stream.ys, hyper);
      CHECK(chained.weights == joint.weights);
      CHECK(chained.bias == joint.bias);
      CHECK(chained.steps == joint.steps);
      CHECK(chained.steps == 200);
    }
  }
}

TEST_CASE("two epochs equal two single-epoch passes") {
  auto stream = testsupport::two_gaussian_stream(80, 1.5, 0.8, 33, 2);
  SgdHyper one_epoch;
  SgdHyper two_epochs;
  two_epochs.epochs_per_batch = 2;
  auto p0 = linear_init(2, LossKind::log_loss);
  auto twice = linear_partial_fit(linear_partial_fit(p0, stream.xs, stream.ys, one_epoch),
                                  stream.xs, stream.ys, one_epoch);
  auto doubled = linear_partial_fit(p0, stream.xs, stream.ys, two_epochs);
  CHECK(twice.weights == doubled.weights);
  CHECK(twice.bias == doubled.bias);
}

TEST_CASE("incremental training reaches batch-oracle accuracy on a separable stream") {
  auto train = testsupport::two_gaussian_stream(1000, 2.0, 0.6, 7, 3);
  auto held_out = testsupport::two_gaussian_stream(500, 2.0, 0.6, 8, 3);

  auto oracle = testsupport::fit_least_squares(train.xs, train.ys);
  CHECK(testsupport::oracle_accuracy(oracle, held_out.xs, held_out.ys) >= 0.98);

  SgdHyper hyper;
  for (LossKind loss : {LossKind::hinge, LossKind::log_loss}) {
    auto p = linear_init(3, loss);
    // 20 batches of 50
    for (int b = 0; b < 20; ++b) {
      std::vector<std::vector<double>> xs(train.xs.begin() + b * 50, train.xs.begin() + (b + 1) * 50);
      std::vector<int> ys(train.ys.begin() + b * 50, train.ys.begin() + (b + 1) * 50);
      p = linear_partial_fit(p, xs, ys, hyper);
    }
    int correct = 0;
    for (size_t i = 0; i < held_out.xs.size(); ++i)
      if (linear_predict(p, held_out.xs[i]) == held_out.ys[i]) ++correct;
    CHECK(static_cast<double>(correct) / static_cast<double>(held_out.xs.size()) >= 0.98);
  }
}
