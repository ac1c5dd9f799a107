#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "noiseflood/flooding.hpp"

namespace nflood {

using Features = std::array<double, kNumBands>;

struct Example {
  Features x{};
  bool adversarial = false;
};

/// Throws DataError if any vector lacks ground truth.
std::vector<Example> to_examples(std::span<const ScoreVector> vectors);

struct Prediction {
  bool adversarial = false;
  double probability = 0.0;  ///< of the adversarial class
};

/// Binary tree stored as a flat node array; node 0 is the root.
/// Split rule: x[feature] < threshold goes left.
struct DecisionTree {
  struct Node {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Leaf output: P(adversarial) for classification trees, the additive
    /// update for regression trees.
    double value = 0.0;
  };
  std::vector<Node> nodes;

  bool empty() const noexcept { return nodes.empty(); }
  const Node& leaf_for(const Features& x) const;
  double value(const Features& x) const { return leaf_for(x).value; }
  std::size_t depth() const;
};

struct TreeParams {
  int max_depth = 4;
  std::size_t min_leaf = 1;
};

/// Candidate split chosen by CART at a node.
struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

/// Best Gini split over all (feature, midpoint) pairs with at least
/// `min_leaf` samples per side. Ties go to the lowest feature, then the
/// smallest threshold. feature == -1 when no split decreases impurity.
Split best_gini_split(std::span<const Example> data, std::size_t min_leaf = 1);

/// Greedy CART on Gini impurity. Throws DataError unless both classes are
/// present; identical feature vectors yield a single leaf.
DecisionTree fit_tree(std::span<const Example> train, const TreeParams& params = {});

Prediction predict(const DecisionTree& tree, const Features& x);

struct ForestParams {
  std::size_t n_trees = 100;
  TreeParams tree{};
  std::size_t max_features = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t max_features = 2;
};

/// Each tree sees a bootstrap resample (seeded by tree_seeds[i]) and draws
/// max_features candidate features per split.
ForestModel fit_forest(std::span<const Example> train, const ForestParams& params = {});

/// Probability is the fraction of trees voting adversarial; decision is
/// probability >= 0.5.
Prediction predict(const ForestModel& forest, const Features& x);

struct BoostModel {
  enum class Loss { Exponential, Logistic };
  struct Stage {
    DecisionTree learner;
    double weight = 1.0;
  };

  Loss loss = Loss::Exponential;
  /// Initial margin: prior log-odds for logistic loss, 0 for exponential.
  double bias = 0.0;
  double learning_rate = 1.0;
  std::vector<Stage> stages;

  // Training diagnostics; not persisted.
  std::vector<double> stage_errors;   ///< AdaBoost weighted error per stage
  std::vector<double> training_loss;  ///< gradient boosting, before each stage and after the last

  double margin(const Features& x) const;
};

struct AdaBoostParams {
  std::size_t n_stages = 50;
};

/// Discrete AdaBoost over decision stumps. Labels are +1 adversarial and -1
/// benign; stage weight 0.5 * ln((1 - err) / err). Boosting stops before a
/// stage with err >= 0.5 and after a stage with err = 0 (whose weight is
/// computed from err clamped to 1e-10).
BoostModel fit_adaboost(std::span<const Example> train, const AdaBoostParams& params = {});

struct GBoostParams {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_leaf = 1;
};

/// Gradient boosting on logistic loss. Each stage fits a least-squares
/// regression tree to the residuals y - p; a leaf's update is
/// learning_rate * mean(residual) / 0.25, a Newton step under the loss's
/// curvature bound, so training loss cannot increase for learning_rate <= 1.
BoostModel fit_gboost(std::span<const Example> train, const GBoostParams& params = {});

/// Mean logistic loss of margins against labels.
double logistic_loss(const BoostModel& model, std::span<const Example> data);

/// Probability is sigmoid(margin) for logistic loss and sigmoid(2 * margin)
/// for exponential loss; decision is margin >= 0.
Prediction predict(const BoostModel& model, const Features& x);

}  // namespace nflood
