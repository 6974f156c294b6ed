#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedflow/errors.hpp"
#include "fedflow/hoeffding.hpp"
#include "test_support.hpp"

using namespace fedflow;

TEST_CASE("hoeffding bound closed form") {
  CHECK(hoeffding_bound(1.0, 1.0, 500) == 0.0);
  CHECK(hoeffding_bound(0.0, 0.5, 500) == 0.0);
  CHECK(hoeffding_bound(1.0, 0.05, 1000) ==
        doctest::Approx(0.038702275602049495).epsilon(1e-9));
  CHECK(std::abs(hoeffding_bound(1.0, 0.05, 1000) - 0.038702) <= 1e-6);

  CHECK_THROWS_AS(hoeffding_bound(1.0, 0.05, 0), ModelError);
  CHECK_THROWS_AS(hoeffding_bound(1.0, 0.0, 10), ModelError);
  CHECK_THROWS_AS(hoeffding_bound(1.0, 1.5, 10), ModelError);
  CHECK_THROWS_AS(hoeffding_bound(-1.0, 0.5, 10), ModelError);
}

TEST_CASE("hoeffding bound monotonicity over a grid") {
  double prev = hoeffding_bound(1.0, 0.05, 1);
  for (int i = 2; i <= 100; ++i) {
    const double cur = hoeffding_bound(1.0, 0.05, i * 10);
    CHECK(cur < prev);
    prev = cur;
  }
  // increasing in 1/delta
  prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double delta = 1.0 / (1.0 + i);
    const double cur = hoeffding_bound(1.0, delta, 1000);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("margin stream splits the root on the informative feature") {
  auto stream = testsupport::margin_stream(5000, 0.5, 2.5, 42);
  HoeffdingTree tree(2, HoeffdingConfig{});
  for (size_t i = 0; i < stream.xs.size(); ++i) tree.learn_one(stream.xs[i], stream.ys[i]);

  REQUIRE(tree.nodes().size() > 1);
  const auto& root = tree.nodes()[0];
  CHECK_FALSE(root.is_leaf());
  CHECK(root.feature == 0);
  CHECK(root.threshold > -0.6);
  CHECK(root.threshold < 0.6);

  // separable training stream is learned perfectly by the final tree
  CHECK(tree.accuracy(stream.xs, stream.ys) == 1.0);
}

TEST_CASE("no split before the grace period") {
  auto stream = testsupport::margin_stream(199, 0.5, 2.5, 1);
  HoeffdingTree tree(2, HoeffdingConfig{});
  for (size_t i = 0; i < stream.xs.size(); ++i) tree.learn_one(stream.xs[i], stream.ys[i]);
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.leaf_count() == 1);
}

TEST_CASE("pure stream never splits") {
  Rng rng(3);
  HoeffdingTree tree(2, HoeffdingConfig{});
  for (int i = 0; i < 5000; ++i)
    tree.learn_one(std::vector<double>{rng.normal(), rng.normal()}, 1);
  CHECK(tree.nodes().size() == 1);
}

TEST_CASE("leaf mass conserves the number of samples") {
  auto stream = testsupport::margin_stream(3000, 0.3, 2.0, 9);
  HoeffdingTree tree(2, HoeffdingConfig{});
  for (size_t i = 0; i < stream.xs.size(); ++i) tree.learn_one(stream.xs[i], stream.ys[i]);
  REQUIRE(tree.nodes().size() > 1);

  // splits move a leaf's observed counts into the children's inherited
  // prior, so observed + inherited mass adds up to the stream length
  double total_mass = 0;
  int64_t observed_since_creation = 0;
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf()) continue;
    observed_since_creation += node.leaf.obs[0] + node.leaf.obs[1];
    total_mass += static_cast<double>(node.leaf.obs[0] + node.leaf.obs[1]) +
                  node.leaf.prior[0] + node.leaf.prior[1];
  }
  CHECK(total_mass == doctest::Approx(3000.0).epsilon(1e-9));
  CHECK(observed_since_creation <= 3000);
  CHECK(tree.samples_seen() == 3000);
}

TEST_CASE("learn_one routes to the leaf that prediction routes to") {
  auto stream = testsupport::margin_stream(2000, 0.4, 2.0, 13);
  HoeffdingTree tree(2, HoeffdingConfig{});
  for (size_t i = 0; i < stream.xs.size(); ++i) {
    const size_t before_nodes = tree.nodes().size();
    const size_t leaf_before = tree.route_leaf(stream.xs[i]);
    const int64_t obs_before = tree.nodes()[leaf_before].leaf.obs[stream.ys[i]];
    tree.learn_one(stream.xs[i], stream.ys[i]);
    if (tree.nodes().size() == before_nodes) {
      CHECK(tree.route_leaf(stream.xs[i]) == leaf_before);
      CHECK(tree.nodes()[leaf_before].leaf.obs[stream.ys[i]] == obs_before + 1);
    }
  }
}

TEST_CASE("single-leaf majority prediction and accuracy arithmetic") {
  HoeffdingTree tree(2, HoeffdingConfig{});
  auto& leaf = tree.nodes()[0].leaf;
  leaf.obs[0] = 7;
  leaf.obs[1] = 3;
  std::vector<double> x{0.0, 0.0};
  CHECK(tree.predict(x) == 0);

  std::vector<std::vector<double>> val{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  std::vector<int> ys{0, 0, 0, 1};  // majority-0 tree gets 3 of 4
  CHECK(tree.accuracy(val, ys) == doctest::Approx(0.75));

  std::vector<std::vector<double>> empty;
  std::vector<int> no_ys;
  CHECK_THROWS_AS(tree.accuracy(empty, no_ys), DataError);
}

TEST_CASE("empty leaf predicts from inherited statistics; ties go benign") {
  HoeffdingTree tree(2, HoeffdingConfig{});
  std::vector<double> x{0.0, 0.0};
  CHECK(tree.predict(x) == 0);  // empty root, tie -> benign
  auto& leaf = tree.nodes()[0].leaf;
  leaf.prior[1] = 2.0;
  leaf.prior[0] = 1.0;
  CHECK(tree.predict(x) == 1);  // no observations, falls back to prior
  leaf.obs[0] = 1;
  leaf.obs[1] = 1;
  CHECK(tree.predict(x) == 0);  // observed tie -> benign
}

TEST_CASE("non-finite input and bad labels are rejected") {
  HoeffdingTree tree(2, HoeffdingConfig{});
  std::vector<double> bad{std::nan(""), 0.0};
  CHECK_THROWS_AS(tree.learn_one(bad, 1), ModelError);
  std::vector<double> ok{0.0, 0.0};
  CHECK_THROWS_AS(tree.learn_one(ok, 2), ModelError);
  std::vector<double> wrong_dim{0.0};
  CHECK_THROWS_AS(tree.predict(wrong_dim), ModelError);
}

TEST_CASE("incremental tree tracks a batch-greedy oracle on a stationary stream") {
  // smaller sibling of the acceptance check
  auto train = testsupport::two_gaussian_stream(8000, 1.0, 1.0, 77, 2);
  auto held_out = testsupport::two_gaussian_stream(2000, 1.0, 1.0, 78, 2);

  HoeffdingTree tree(2, HoeffdingConfig{});
  for (size_t i = 0; i < train.xs.size(); ++i) tree.learn_one(train.xs[i], train.ys[i]);
  auto batch = testsupport::fit_batch_tree(train.xs, train.ys, 5);

  const double inc_acc = tree.accuracy(held_out.xs, held_out.ys);
  const double batch_acc = testsupport::oracle_accuracy(batch, held_out.xs, held_out.ys);
  CHECK(std::abs(inc_acc - batch_acc) <= 0.05);
}
