#include "noiseflood/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "noiseflood/audio.hpp"
#include "noiseflood/errors.hpp"
#include "noiseflood/seed.hpp"

namespace nflood {
namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kMinAdaBoostError = 1e-10;
constexpr double kLogisticCurvatureBound = 0.25;

void require_both_classes(std::span<const Example> data) {
  const auto adv = std::count_if(data.begin(), data.end(),
                                 [](const Example& e) { return e.adversarial; });
  if (adv == 0 || static_cast<std::size_t>(adv) == data.size()) {
    throw DataError("training data must contain both adversarial and benign examples");
  }
}

double gini(double pos, double neg) {
  const double total = pos + neg;
  if (total <= 0) return 0.0;
  const double p = pos / total;
  const double q = neg / total;
  return 1.0 - p * p - q * q;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-y * margin)) with y in {-1, +1}.
double logistic_term(double margin, bool adversarial) {
  const double z = adversarial ? -margin : margin;
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

std::vector<std::size_t> order_by_feature(std::span<const Example> data,
                                          const std::vector<std::size_t>& rows, int feature) {
  std::vector<std::size_t> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
    return data[a].x[feature] < data[b].x[feature];
  });
  return sorted;
}

// Best Gini split over `rows` restricted to `features` (ascending).
Split gini_split(std::span<const Example> data, const std::vector<std::size_t>& rows,
                 const std::vector<int>& features, std::size_t min_leaf) {
  Split best;
  double pos = 0;
  for (auto r : rows) pos += data[r].adversarial ? 1 : 0;
  const double n = static_cast<double>(rows.size());
  const double parent = gini(pos, n - pos);
  for (int f : features) {
    const auto sorted = order_by_feature(data, rows, f);
    double left_pos = 0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      left_pos += data[sorted[i]].adversarial ? 1 : 0;
      const double a = data[sorted[i]].x[f];
      const double b = data[sorted[i + 1]].x[f];
      if (a == b) continue;
      const std::size_t left_n = i + 1;
      const std::size_t right_n = sorted.size() - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      const double ln = static_cast<double>(left_n);
      const double rn = static_cast<double>(right_n);
      const double weighted =
          (ln * gini(left_pos, ln - left_pos) + rn * gini(pos - left_pos, rn - (pos - left_pos))) / n;
      const double decrease = parent - weighted;
      if (decrease > kTieTolerance && decrease > best.impurity_decrease + kTieTolerance) {
        best = Split{f, (a + b) / 2.0, decrease};
      }
    }
  }
  return best;
}

struct Grower {
  std::span<const Example> data;
  TreeParams params;
  std::size_t max_features = kNumBands;
  NoiseRng* rng = nullptr;
  DecisionTree tree;

  std::vector<int> candidate_features() {
    std::vector<int> all(kNumBands);
    std::iota(all.begin(), all.end(), 0);
    if (rng == nullptr || max_features >= kNumBands) return all;
    for (std::size_t i = 0; i < max_features; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, kNumBands - 1);
      std::swap(all[i], all[pick(*rng)]);
    }
    all.resize(max_features);
    std::sort(all.begin(), all.end());
    return all;
  }

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double pos = 0;
    for (auto r : rows) pos += data[r].adversarial ? 1 : 0;
    tree.nodes[index].value = rows.empty() ? 0.0 : pos / static_cast<double>(rows.size());

    const bool pure = pos == 0 || pos == static_cast<double>(rows.size());
    if (pure || depth >= params.max_depth || rows.size() < 2 * params.min_leaf) return index;
    const Split split = gini_split(data, rows, candidate_features(), params.min_leaf);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (data[r].x[split.feature] < split.threshold ? left : right).push_back(r);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree.nodes[index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

struct Stump {
  int feature = -1;
  double threshold = 0.0;
  double left_value = 1.0;  // +1 adversarial, -1 benign
  double error = 1.0;
};

// Weighted-error-minimising stump. Polarity +1 (left -> adversarial) is tried
// before -1; ties keep the earliest (feature, threshold, polarity).
Stump best_stump(std::span<const Example> data, const std::vector<double>& weights) {
  Stump best;
  double total_pos = 0;
  double total_neg = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data[i].adversarial ? total_pos : total_neg) += weights[i];
  }
  const auto rows = all_rows(data.size());
  for (int f = 0; f < static_cast<int>(kNumBands); ++f) {
    const auto sorted = order_by_feature(data, rows, f);
    double left_pos = 0;
    double left_neg = 0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      (data[sorted[i]].adversarial ? left_pos : left_neg) += weights[sorted[i]];
      const double a = data[sorted[i]].x[f];
      const double b = data[sorted[i + 1]].x[f];
      if (a == b) continue;
      const double err_plus = left_neg + (total_pos - left_pos);
      const double err_minus = left_pos + (total_neg - left_neg);
      if (err_plus < best.error - kTieTolerance) best = Stump{f, (a + b) / 2.0, 1.0, err_plus};
      if (err_minus < best.error - kTieTolerance) best = Stump{f, (a + b) / 2.0, -1.0, err_minus};
    }
  }
  return best;
}

DecisionTree stump_tree(const Stump& s) {
  DecisionTree t;
  t.nodes.resize(3);
  t.nodes[0].feature = s.feature;
  t.nodes[0].threshold = s.threshold;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  t.nodes[1].value = s.left_value;
  t.nodes[2].value = -s.left_value;
  return t;
}

// Least-squares regression tree on `targets`; leaf value = scale * mean.
struct RegressionGrower {
  std::span<const Example> data;
  const std::vector<double>& targets;
  int max_depth;
  std::size_t min_leaf;
  double leaf_scale;
  DecisionTree tree;

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0;
    for (auto r : rows) sum += targets[r];
    const double n = static_cast<double>(rows.size());
    tree.nodes[index].value = rows.empty() ? 0.0 : leaf_scale * sum / n;
    if (depth >= max_depth || rows.size() < 2 * min_leaf) return index;

    int best_feature = -1;
    double best_threshold = 0;
    double best_gain = kTieTolerance;
    const double parent = sum * sum / n;
    for (int f = 0; f < static_cast<int>(kNumBands); ++f) {
      const auto sorted = order_by_feature(data, rows, f);
      double left_sum = 0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_sum += targets[sorted[i]];
        const double a = data[sorted[i]].x[f];
        const double b = data[sorted[i + 1]].x[f];
        if (a == b) continue;
        const std::size_t ln = i + 1;
        const std::size_t rn = sorted.size() - ln;
        if (ln < min_leaf || rn < min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(ln) +
                            right_sum * right_sum / static_cast<double>(rn) - parent;
        if (gain > best_gain + kTieTolerance) {
          best_gain = gain;
          best_feature = f;
          best_threshold = (a + b) / 2.0;
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (data[r].x[best_feature] < best_threshold ? left : right).push_back(r);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree.nodes[index];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return index;
  }
};

}  // namespace

std::vector<Example> to_examples(std::span<const ScoreVector> vectors) {
  std::vector<Example> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_adversarial) throw DataError("row '" + v.id + "' has no ground truth");
    out.push_back(Example{v.features(), *v.is_adversarial});
  }
  return out;
}

const DecisionTree::Node& DecisionTree::leaf_for(const Features& x) const {
  if (nodes.empty()) throw ConfigError("decision tree is not fitted");
  const Node* node = &nodes[0];
  while (node->feature >= 0) {
    node = &nodes[x[node->feature] < node->threshold ? node->left : node->right];
  }
  return *node;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[i].feature >= 0) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return deepest;
}

Split best_gini_split(std::span<const Example> data, std::size_t min_leaf) {
  return gini_split(data, all_rows(data.size()), {0, 1, 2, 3, 4}, min_leaf);
}

DecisionTree fit_tree(std::span<const Example> train, const TreeParams& params) {
  require_both_classes(train);
  if (params.max_depth < 0 || params.min_leaf < 1) {
    throw ConfigError("tree needs max_depth >= 0 and min_leaf >= 1");
  }
  Grower grower{train, params, kNumBands, nullptr, {}};
  grower.grow(all_rows(train.size()), 0);
  return std::move(grower.tree);
}

Prediction predict(const DecisionTree& tree, const Features& x) {
  const double p = tree.value(x);
  return {p >= 0.5, p};
}

ForestModel fit_forest(std::span<const Example> train, const ForestParams& params) {
  require_both_classes(train);
  if (params.n_trees < 1) throw ConfigError("forest needs at least one tree");
  if (params.max_features < 1 || params.max_features > kNumBands) {
    throw ConfigError("max_features must be in [1, 5]");
  }
  ForestModel forest;
  forest.max_features = params.max_features;
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t seed = derive_seed(params.seed, t);
    NoiseRng rng(seed);
    std::vector<Example> sample;
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
      sample.reserve(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) sample.push_back(train[pick(rng)]);
    } else {
      sample.assign(train.begin(), train.end());
    }
    Grower grower{sample, params.tree, params.max_features, &rng, {}};
    grower.grow(all_rows(sample.size()), 0);
    forest.trees.push_back(std::move(grower.tree));
    forest.tree_seeds.push_back(seed);
  }
  return forest;
}

Prediction predict(const ForestModel& forest, const Features& x) {
  if (forest.trees.empty()) throw ConfigError("forest is not fitted");
  std::size_t votes = 0;
  for (const auto& tree : forest.trees) votes += tree.value(x) >= 0.5 ? 1 : 0;
  const double p = static_cast<double>(votes) / static_cast<double>(forest.trees.size());
  return {p >= 0.5, p};
}

double BoostModel::margin(const Features& x) const {
  double m = bias;
  for (const auto& stage : stages) m += stage.weight * stage.learner.value(x);
  return m;
}

BoostModel fit_adaboost(std::span<const Example> train, const AdaBoostParams& params) {
  require_both_classes(train);
  BoostModel model;
  model.loss = BoostModel::Loss::Exponential;
  const std::size_t n = train.size();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));

  for (std::size_t stage = 0; stage < params.n_stages; ++stage) {
    const Stump stump = best_stump(train, weights);
    if (stump.feature < 0 || stump.error >= 0.5) break;
    const double err = std::max(stump.error, kMinAdaBoostError);
    const double alpha = 0.5 * std::log((1.0 - err) / err);
    DecisionTree learner = stump_tree(stump);

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = train[i].adversarial ? 1.0 : -1.0;
      weights[i] *= std::exp(-alpha * y * learner.value(train[i].x));
      total += weights[i];
    }
    for (double& w : weights) w /= total;

    model.stages.push_back({std::move(learner), alpha});
    model.stage_errors.push_back(stump.error);
    if (stump.error <= kTieTolerance) break;
  }
  return model;
}

double logistic_loss(const BoostModel& model, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  double total = 0;
  for (const auto& e : data) total += logistic_term(model.margin(e.x), e.adversarial);
  return total / static_cast<double>(data.size());
}

BoostModel fit_gboost(std::span<const Example> train, const GBoostParams& params) {
  require_both_classes(train);
  if (!(params.learning_rate >= 0.0) || params.max_depth < 0 || params.min_leaf < 1) {
    throw ConfigError("gradient boosting needs learning_rate >= 0, max_depth >= 0, min_leaf >= 1");
  }
  BoostModel model;
  model.loss = BoostModel::Loss::Logistic;
  model.learning_rate = params.learning_rate;
  const double pos = static_cast<double>(std::count_if(
      train.begin(), train.end(), [](const Example& e) { return e.adversarial; }));
  const double neg = static_cast<double>(train.size()) - pos;
  model.bias = std::log(pos / neg);

  const std::size_t n = train.size();
  std::vector<double> margins(n, model.bias);
  std::vector<double> residuals(n);
  auto mean_loss = [&] {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total += logistic_term(margins[i], train[i].adversarial);
    return total / static_cast<double>(n);
  };
  model.training_loss.push_back(mean_loss());

  for (std::size_t stage = 0; stage < params.n_stages; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      residuals[i] = (train[i].adversarial ? 1.0 : 0.0) - sigmoid(margins[i]);
    }
    RegressionGrower grower{train, residuals, params.max_depth, params.min_leaf,
                            params.learning_rate / kLogisticCurvatureBound, {}};
    grower.grow(all_rows(n), 0);
    for (std::size_t i = 0; i < n; ++i) margins[i] += grower.tree.value(train[i].x);
    model.stages.push_back({std::move(grower.tree), 1.0});
    model.training_loss.push_back(mean_loss());
  }
  return model;
}

Prediction predict(const BoostModel& model, const Features& x) {
  const double m = model.margin(x);
  const double p =
      model.loss == BoostModel::Loss::Logistic ? sigmoid(m) : sigmoid(2.0 * m);
  return {m >= 0.0, p};
}

}  // namespace nflood
