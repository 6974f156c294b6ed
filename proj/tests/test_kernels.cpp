#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <vector>

#include "fedflow/kernels.hpp"
#include "fedflow/rng.hpp"

using namespace fedflow;

namespace {

std::vector<std::vector<double>> random_rows(size_t n, size_t d, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows)
    for (auto& v : row) v = rng.normal();
  return rows;
}

}  // namespace

TEST_CASE("column means") {
  std::vector<std::vector<double>> rows{{1, 10}, {3, 20}};
  auto means = column_means(rows);
  CHECK(means[0] == doctest::Approx(2.0));
  CHECK(means[1] == doctest::Approx(15.0));
}

TEST_CASE("blocked covariance agrees with the serial reference") {
  auto rows = random_rows(5000, 6, 13);
  auto means = column_means(rows);
  auto serial = covariance_serial(rows, means);
  auto blocked = covariance_blocked(rows, means);
  REQUIRE(serial.size() == blocked.size());
  for (size_t i = 0; i < serial.size(); ++i)
    CHECK(blocked[i] == doctest::Approx(serial[i]).epsilon(1e-12));
}

TEST_CASE("blocked covariance is independent of the thread count") {
  auto rows = random_rows(10000, 5, 17);
  auto means = column_means(rows);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto one = covariance_blocked(rows, means);
  omp_set_num_threads(4);
  auto four = covariance_blocked(rows, means);
  omp_set_num_threads(saved);

  CHECK(one == four);  // bitwise
}

TEST_CASE("parallel confusion kernel equals the serial reference exactly") {
  auto rows = random_rows(20000, 3, 19);
  std::vector<int> ys(rows.size());
  Rng rng(23);
  for (auto& y : ys) y = static_cast<int>(rng.below(2));

  auto predict = [](const std::vector<double>& x) { return x[0] + x[1] > 0.2 ? 1 : 0; };
  auto serial = eval_confusion_serial(rows, ys, predict);
  auto parallel = eval_confusion_parallel(rows, ys, predict);
  CHECK(serial.tp == parallel.tp);
  CHECK(serial.fp == parallel.fp);
  CHECK(serial.tn == parallel.tn);
  CHECK(serial.fn == parallel.fn);
  CHECK(serial.total() == static_cast<int64_t>(rows.size()));
}
