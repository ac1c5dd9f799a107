#include "noiseflood/detector.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <sstream>

#include "noiseflood/errors.hpp"

namespace nflood {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::pair<DetectorKind, const char*>, 7> kKindNames{{
    {DetectorKind::Threshold, "threshold"},
    {DetectorKind::Majority, "majority"},
    {DetectorKind::Ltv, "ltv"},
    {DetectorKind::Tree, "tree"},
    {DetectorKind::Forest, "forest"},
    {DetectorKind::AdaBoost, "adaboost"},
    {DetectorKind::GBoost, "gboost"},
}};

json threshold_to_json(const ThresholdModel& m, const BandPlan& plan) {
  return json{{"band_index", m.band_index},
              {"band", plan[m.band_index].name()},
              {"threshold", m.threshold},
              {"info_gain_bits", m.stats.info_gain},
              {"adversarial", m.stats.adversarial},
              {"benign", m.stats.benign},
              {"degenerate", m.stats.degenerate}};
}

ThresholdModel threshold_from_json(const json& j) {
  ThresholdModel m;
  m.band_index = j.at("band_index").get<std::size_t>();
  if (m.band_index >= kNumBands) throw DataError("band_index out of range");
  m.threshold = j.at("threshold").get<double>();
  m.stats.info_gain = j.at("info_gain_bits").get<double>();
  m.stats.adversarial = j.at("adversarial").get<std::size_t>();
  m.stats.benign = j.at("benign").get<std::size_t>();
  m.stats.degenerate = j.at("degenerate").get<bool>();
  return m;
}

json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.feature < 0) {
      nodes.push_back(json{{"leaf", n.value}});
    } else {
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value}});
    }
  }
  return nodes;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  for (const auto& n : j) {
    DecisionTree::Node node;
    if (n.contains("leaf")) {
      node.value = n.at("leaf").get<double>();
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      node.value = n.at("value").get<double>();
    }
    t.nodes.push_back(node);
  }
  const int size = static_cast<int>(t.nodes.size());
  if (size == 0) throw DataError("tree has no nodes");
  for (int i = 0; i < size; ++i) {
    const auto& n = t.nodes[i];
    if (n.feature >= static_cast<int>(kNumBands) ||
        (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= size || n.right >= size))) {
      throw DataError("tree node " + std::to_string(i) + " is malformed");
    }
  }
  return t;
}

json boost_to_json(const BoostModel& m) {
  json stages = json::array();
  for (const auto& s : m.stages) {
    stages.push_back(json{{"weight", s.weight}, {"tree", tree_to_json(s.learner)}});
  }
  return json{{"loss", m.loss == BoostModel::Loss::Logistic ? "logistic" : "exponential"},
              {"bias", m.bias},
              {"learning_rate", m.learning_rate},
              {"stages", stages}};
}

BoostModel boost_from_json(const json& j) {
  BoostModel m;
  const auto loss = j.at("loss").get<std::string>();
  if (loss == "logistic") {
    m.loss = BoostModel::Loss::Logistic;
  } else if (loss == "exponential") {
    m.loss = BoostModel::Loss::Exponential;
  } else {
    throw DataError("unknown boosting loss '" + loss + "'");
  }
  m.bias = j.at("bias").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  for (const auto& s : j.at("stages")) {
    m.stages.push_back({tree_from_json(s.at("tree")), s.at("weight").get<double>()});
  }
  return m;
}

}  // namespace

std::string to_string(DetectorKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

DetectorKind parse_detector_kind(const std::string& text) {
  for (const auto& [k, name] : kKindNames) {
    if (text == name) return k;
  }
  throw ConfigError("unknown detector kind '" + text +
                    "' (threshold|majority|ltv|tree|forest|adaboost|gboost)");
}

Prediction DetectorModel::predict(const ScoreVector& v) const {
  return std::visit(
      [&](const auto& m) -> Prediction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ThresholdModel>) {
          const bool adv = m.detect(v.scores[m.band_index].epsilon);
          return {adv, adv ? 1.0 : 0.0};
        } else if constexpr (std::is_same_v<T, VotingModel>) {
          return {m.detect(v), m.votes(v) / static_cast<double>(kNumBands)};
        } else {
          return nflood::predict(m, v.features());
        }
      },
      body);
}

std::string serialize(const DetectorModel& model) {
  const auto& p = model.provenance;
  json bands = json::array();
  for (const auto& b : p.plan.bands()) bands.push_back(b.name());
  json provenance{{"seed", p.seed},
                  {"s", p.step_size},
                  {"eps_max", p.epsilon_max},
                  {"bands", bands},
                  {"dataset_hash", p.dataset_hash},
                  {"training_rows", p.training_rows}};
  if (!p.run_config.empty()) provenance["run_config"] = json::parse(p.run_config);

  json body = std::visit(
      [&](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ThresholdModel>) {
          return threshold_to_json(m, p.plan);
        } else if constexpr (std::is_same_v<T, VotingModel>) {
          json members = json::array();
          for (const auto& t : m.members) members.push_back(threshold_to_json(t, p.plan));
          return json{{"vote_threshold", m.vote_threshold}, {"members", members}};
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          return json{{"nodes", tree_to_json(m)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
          return json{{"max_features", m.max_features},
                      {"tree_seeds", m.tree_seeds},
                      {"trees", trees}};
        } else {
          return boost_to_json(m);
        }
      },
      model.body);

  json doc{{"format", "nflood-model"},
           {"format_version", kModelFormatVersion},
           {"kind", to_string(model.kind)},
           {"provenance", provenance},
           {"model", body}};
  return doc.dump(2) + "\n";
}

DetectorModel deserialize(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "nflood-model") {
      throw DataError("not an nflood model file");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format version " + std::to_string(version));
    }
    DetectorModel model;
    try {
      model.kind = parse_detector_kind(doc.at("kind").get<std::string>());
    } catch (const ConfigError& e) {
      throw DataError(e.what());
    }

    const auto& pj = doc.at("provenance");
    auto& p = model.provenance;
    p.seed = pj.at("seed").get<std::uint64_t>();
    p.step_size = pj.at("s").get<int>();
    p.epsilon_max = pj.at("eps_max").get<int>();
    std::array<FrequencyBand, kNumBands> bands{
        FrequencyBand::unfiltered(), FrequencyBand::unfiltered(), FrequencyBand::unfiltered(),
        FrequencyBand::unfiltered(), FrequencyBand::unfiltered()};
    const auto& bj = pj.at("bands");
    if (bj.size() != kNumBands) throw DataError("model must list 5 bands");
    for (std::size_t i = 0; i < kNumBands; ++i) {
      bands[i] = FrequencyBand::parse(bj[i].get<std::string>());
    }
    p.plan = BandPlan(bands);
    p.dataset_hash = pj.at("dataset_hash").get<std::string>();
    p.training_rows = pj.at("training_rows").get<std::size_t>();
    if (pj.contains("run_config")) p.run_config = pj.at("run_config").dump();

    const auto& mj = doc.at("model");
    switch (model.kind) {
      case DetectorKind::Threshold:
        model.body = threshold_from_json(mj);
        break;
      case DetectorKind::Majority:
      case DetectorKind::Ltv: {
        VotingModel voting;
        voting.vote_threshold = mj.at("vote_threshold").get<int>();
        if (voting.vote_threshold < 1 || voting.vote_threshold > static_cast<int>(kNumBands)) {
          throw DataError("vote_threshold must be in [1, 5]");
        }
        const auto& members = mj.at("members");
        if (members.size() != kNumBands) throw DataError("voting model needs 5 members");
        for (std::size_t i = 0; i < kNumBands; ++i) {
          voting.members[i] = threshold_from_json(members[i]);
        }
        model.body = voting;
        break;
      }
      case DetectorKind::Tree:
        model.body = tree_from_json(mj.at("nodes"));
        break;
      case DetectorKind::Forest: {
        ForestModel forest;
        forest.max_features = mj.at("max_features").get<std::size_t>();
        forest.tree_seeds = mj.at("tree_seeds").get<std::vector<std::uint64_t>>();
        for (const auto& t : mj.at("trees")) forest.trees.push_back(tree_from_json(t));
        if (forest.trees.empty()) throw DataError("forest has no trees");
        model.body = std::move(forest);
        break;
      }
      case DetectorKind::AdaBoost:
      case DetectorKind::GBoost:
        model.body = boost_from_json(mj);
        break;
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize(model);
  if (!out) throw Error("write failed for " + path.string());
}

DetectorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize(text.str());
}

}  // namespace nflood
