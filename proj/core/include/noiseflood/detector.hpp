#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "noiseflood/detection.hpp"
#include "noiseflood/trees.hpp"

namespace nflood {

enum class DetectorKind { Threshold, Majority, Ltv, Tree, Forest, AdaBoost, GBoost };

std::string to_string(DetectorKind kind);
/// Accepts threshold|majority|ltv|tree|forest|adaboost|gboost.
DetectorKind parse_detector_kind(const std::string& text);

/// Where the training scores came from. Embedded in every model file.
struct Provenance {
  std::uint64_t seed = 0;
  int step_size = kDefaultStepSize;
  int epsilon_max = kDefaultEpsilonMax;
  BandPlan plan;
  std::string dataset_hash;
  std::size_t training_rows = 0;
  std::string run_config;  ///< JSON run configuration, may be empty
};

/// Any trained detector plus its provenance.
struct DetectorModel {
  using Body = std::variant<ThresholdModel, VotingModel, DecisionTree,
                            ForestModel, BoostModel>;

  DetectorKind kind = DetectorKind::Threshold;
  Body body;
  Provenance provenance;

  Prediction predict(const ScoreVector& v) const;
  bool detect(const ScoreVector& v) const { return predict(v).adversarial; }
};

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON text. Doubles are written with round-trip precision.
std::string serialize(const DetectorModel& model);
/// Throws DataError on malformed content or an unknown format version.
DetectorModel deserialize(const std::string& text);

void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace nflood
