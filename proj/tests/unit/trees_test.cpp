#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <noiseflood/errors.hpp>
#include <noiseflood/trees.hpp>

#include "oracles.hpp"

namespace nflood {
namespace {

Example ex(std::array<double, 5> x, bool adv) { return Example{x, adv}; }

std::vector<Example> random_dataset(std::mt19937_64& rng, std::size_t max_points) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_points)(rng);
  std::uniform_int_distribution<int> grid(1, 10);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    for (auto& v : e.x) v = 50.0 * grid(rng);
    e.adversarial = std::bernoulli_distribution(0.4)(rng);
    out.push_back(e);
  }
  out[0].adversarial = true;
  out[1].adversarial = false;
  return out;
}

std::vector<Example> separable(std::mt19937_64& rng, std::size_t n) {
  std::vector<Example> out;
  std::uniform_real_distribution<double> low(50, 400);
  std::uniform_real_distribution<double> high(600, 2500);
  std::uniform_real_distribution<double> any(50, 2500);
  for (std::size_t i = 0; i < n; ++i) {
    const bool adv = i % 2 == 0;
    Example e;
    for (auto& v : e.x) v = any(rng);
    e.x[1] = adv ? low(rng) : high(rng);
    e.x[3] = adv ? low(rng) : high(rng);
    e.adversarial = adv;
    out.push_back(e);
  }
  return out;
}

double accuracy(const auto& model, std::span<const Example> data) {
  std::size_t right = 0;
  for (const auto& e : data) right += predict(model, e.x).adversarial == e.adversarial;
  return static_cast<double>(right) / static_cast<double>(data.size());
}

// XOR in features 0 and 1. Feature 2 alternates labels along its own axis,
// so no single stump separates it either.
std::vector<Example> xor_pattern() {
  return {ex({0, 0, 1, 7, 7}, false), ex({1, 0, 2, 7, 7}, true), ex({0, 1, 4, 7, 7}, true),
          ex({1, 1, 3, 7, 7}, false)};
}

TEST(Tree, SingleSeparatingFeature) {
  std::vector<Example> data;
  for (double v : {50.0, 100.0}) data.push_back(ex({900, v, 900, 900, 900}, true));
  for (double v : {200.0, 300.0}) data.push_back(ex({900, v, 900, 900, 900}, false));
  const auto tree = fit_tree(data);
  ASSERT_EQ(tree.nodes.size(), 3u);
  EXPECT_EQ(tree.nodes[0].feature, 1);
  EXPECT_EQ(tree.nodes[0].threshold, 150);
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_TRUE(predict(tree, {900, 100, 900, 900, 900}).adversarial);
  EXPECT_FALSE(predict(tree, {900, 150, 900, 900, 900}).adversarial);
}

TEST(Tree, SingleClassIsRejected) {
  std::vector<Example> data{ex({1, 1, 1, 1, 1}, true), ex({2, 2, 2, 2, 2}, true)};
  EXPECT_THROW(fit_tree(data), DataError);
}

TEST(Tree, IdenticalVectorsGiveOneLeaf) {
  std::vector<Example> data{ex({5, 5, 5, 5, 5}, true), ex({5, 5, 5, 5, 5}, false),
                            ex({5, 5, 5, 5, 5}, false), ex({5, 5, 5, 5, 5}, false)};
  const auto tree = fit_tree(data);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(predict(tree, data[0].x).probability, 0.25);
}

TEST(Tree, SplitSearchMatchesBruteForce) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto data = random_dataset(rng, 50);
    for (std::size_t min_leaf : {1u, 3u}) {
      const auto split = best_gini_split(data, min_leaf);
      const auto oracle = testing::brute_force_gini_split(data, min_leaf);
      ASSERT_EQ(split.feature, oracle.feature) << "trial " << trial;
      if (oracle.feature >= 0) {
        ASSERT_EQ(split.threshold, oracle.threshold);
        ASSERT_NEAR(split.impurity_decrease, oracle.decrease, 1e-12);
      }
    }
  }
}

TEST(Tree, RowOrderDoesNotMatter) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto data = random_dataset(rng, 40);
    const auto a = fit_tree(data);
    std::shuffle(data.begin(), data.end(), rng);
    const auto b = fit_tree(data);
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      EXPECT_EQ(a.nodes[i].feature, b.nodes[i].feature);
      EXPECT_EQ(a.nodes[i].threshold, b.nodes[i].threshold);
      EXPECT_DOUBLE_EQ(a.nodes[i].value, b.nodes[i].value);
    }
  }
}

TEST(Tree, RespectsDepthAndMinLeaf) {
  std::mt19937_64 rng(3);
  const auto data = random_dataset(rng, 50);
  EXPECT_LE(fit_tree(data, {2, 1}).depth(), 2u);
  const auto tree = fit_tree(data, {10, 5});
  // Count training rows per leaf.
  std::vector<int> per_node(tree.nodes.size(), 0);
  for (const auto& e : data) ++per_node[&tree.leaf_for(e.x) - tree.nodes.data()];
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].feature >= 0) continue;
    EXPECT_GE(per_node[i], 5);
  }
}

TEST(Forest, SingleTreeWithoutBootstrapEqualsTree) {
  std::mt19937_64 rng(11);
  const auto data = random_dataset(rng, 40);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.max_features = 5;
  const auto forest = fit_forest(data, params);
  const auto tree = fit_tree(data, params.tree);
  for (const auto& e : data) {
    EXPECT_EQ(predict(forest, e.x).adversarial, predict(tree, e.x).adversarial);
  }
}

TEST(Forest, DeterministicPerSeed) {
  std::mt19937_64 rng(12);
  const auto data = random_dataset(rng, 40);
  ForestParams params;
  params.n_trees = 15;
  params.seed = 5;
  const auto a = fit_forest(data, params);
  const auto b = fit_forest(data, params);
  EXPECT_EQ(a.tree_seeds, b.tree_seeds);
  for (const auto& e : data) EXPECT_EQ(predict(a, e.x).probability, predict(b, e.x).probability);
}

TEST(Forest, SeparableTrainingAccuracy) {
  std::mt19937_64 rng(13);
  const auto data = separable(rng, 60);
  ForestParams params;
  params.n_trees = 25;
  params.seed = 1;
  EXPECT_EQ(accuracy(fit_forest(data, params), data), 1.0);
}

TEST(Forest, IdenticalTreesGiveHardProbabilities) {
  std::mt19937_64 rng(14);
  const auto data = random_dataset(rng, 30);
  ForestParams params;
  params.n_trees = 5;
  params.bootstrap = false;
  params.max_features = 5;
  const auto forest = fit_forest(data, params);
  for (const auto& e : data) {
    const double p = predict(forest, e.x).probability;
    EXPECT_TRUE(p == 0.0 || p == 1.0);
  }
}

TEST(AdaBoost, OneStumpWhenSeparable) {
  std::mt19937_64 rng(15);
  std::vector<Example> data;
  for (int i = 0; i < 20; ++i) data.push_back(ex({500, 40.0 + 50 * i, 500, 500, 500}, i < 8));
  const auto model = fit_adaboost(data);
  EXPECT_EQ(model.stages.size(), 1u);
  EXPECT_EQ(accuracy(model, data), 1.0);
}

TEST(AdaBoost, XorPatternNeedsThreeStumps) {
  const auto data = xor_pattern();
  // Worked by hand: each stage misclassifies one point, whose weight is
  // 1/4, then 1/6 after the first reweighting, then 1/5.
  const auto model = fit_adaboost(data, {3});
  ASSERT_EQ(model.stages.size(), 3u);
  EXPECT_EQ(accuracy(model, data), 1.0);
  EXPECT_NEAR(model.stage_errors[0], 1.0 / 4.0, 1e-12);
  EXPECT_NEAR(model.stage_errors[1], 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(model.stage_errors[2], 1.0 / 5.0, 1e-12);
  EXPECT_NEAR(model.stages[0].weight, 0.5 * std::log(3.0), 1e-12);
  EXPECT_NEAR(model.stages[1].weight, 0.5 * std::log(5.0), 1e-12);
  EXPECT_NEAR(model.stages[2].weight, std::log(2.0), 1e-12);
  EXPECT_LT(accuracy(fit_adaboost(data, {1}), data), 1.0);
  EXPECT_LT(accuracy(fit_adaboost(data, {2}), data), 1.0);
}

TEST(AdaBoost, MatchesReferenceUpdate) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    auto data = random_dataset(rng, 10);
    const auto model = fit_adaboost(data, {6});
    const auto ref = testing::reference_adaboost(data, 6);
    ASSERT_EQ(model.stages.size(), ref.alphas.size()) << "trial " << trial;
    for (std::size_t s = 0; s < ref.alphas.size(); ++s) {
      EXPECT_NEAR(model.stages[s].weight, ref.alphas[s], 1e-9);
      EXPECT_NEAR(model.stage_errors[s], ref.errors[s], 1e-12);
    }
  }
}

TEST(AdaBoost, TrainingErrorBound) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_dataset(rng, 50);
    const auto model = fit_adaboost(data, {20});
    double bound = 1.0;
    for (double err : model.stage_errors) bound *= 2 * std::sqrt(err * (1 - err));
    EXPECT_LE(1.0 - accuracy(model, data), bound + 1e-12);
    for (const auto& s : model.stages) EXPECT_TRUE(std::isfinite(s.weight));
  }
}

TEST(GBoost, ZeroLearningRateIsPrior) {
  std::mt19937_64 rng(18);
  const auto data = random_dataset(rng, 30);
  GBoostParams params;
  params.learning_rate = 0;
  const auto model = fit_gboost(data, params);
  double pos = 0;
  for (const auto& e : data) pos += e.adversarial;
  const double prior = std::log(pos / (static_cast<double>(data.size()) - pos));
  EXPECT_NEAR(model.bias, prior, 1e-12);
  for (const auto& e : data) EXPECT_NEAR(model.margin(e.x), prior, 1e-12);
}

TEST(GBoost, ZeroStagesIsPrior) {
  std::mt19937_64 rng(19);
  const auto data = random_dataset(rng, 30);
  GBoostParams params;
  params.n_stages = 0;
  const auto model = fit_gboost(data, params);
  EXPECT_TRUE(model.stages.empty());
  const double p = predict(model, data[0].x).probability;
  double pos = 0;
  for (const auto& e : data) pos += e.adversarial;
  EXPECT_NEAR(p, pos / static_cast<double>(data.size()), 1e-12);
}

TEST(GBoost, LossNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto data = seed % 2 ? separable(rng, 40) : random_dataset(rng, 50);
    for (double lr : {0.1, 0.5, 1.0}) {
      GBoostParams params;
      params.n_stages = 40;
      params.learning_rate = lr;
      const auto model = fit_gboost(data, params);
      ASSERT_EQ(model.training_loss.size(), model.stages.size() + 1);
      for (std::size_t i = 1; i < model.training_loss.size(); ++i) {
        ASSERT_LE(model.training_loss[i], model.training_loss[i - 1] + 1e-12)
            << "seed " << seed << " lr " << lr << " stage " << i;
      }
      EXPECT_NEAR(model.training_loss.back(), logistic_loss(model, data), 1e-12);
    }
  }
}

TEST(GBoost, FitsSeparableData) {
  std::mt19937_64 rng(20);
  const auto data = separable(rng, 60);
  EXPECT_EQ(accuracy(fit_gboost(data), data), 1.0);
}

TEST(Predict, EmptyModelsAreRejected) {
  EXPECT_THROW(predict(DecisionTree{}, Features{}), Error);
  EXPECT_THROW(predict(ForestModel{}, Features{}), Error);
}

TEST(ToExamples, RequiresGroundTruth) {
  ScoreVector v;
  EXPECT_THROW(to_examples(std::vector<ScoreVector>{v}), DataError);
  v.is_adversarial = true;
  v.scores[2].epsilon = 150;
  const auto e = to_examples(std::vector<ScoreVector>{v});
  EXPECT_EQ(e[0].x[2], 150);
  EXPECT_TRUE(e[0].adversarial);
}

}  // namespace
}  // namespace nflood
