#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "noiseflood/flooding.hpp"

namespace nflood {

struct LabeledScore {
  double score = 0.0;
  bool is_adversarial = false;
};

struct ThresholdStats {
  double info_gain = 0.0;  ///< bits
  std::size_t adversarial = 0;
  std::size_t benign = 0;
  /// True when all scores were equal and no split candidate existed.
  bool degenerate = false;
};

/// Single-band detector: score < threshold means adversarial.
struct ThresholdModel {
  double threshold = 0.0;
  std::size_t band_index = 0;
  ThresholdStats stats;

  bool detect(double score) const noexcept { return score < threshold; }
};

/// Binary entropy, in bits, of a two-class count.
double binary_entropy(std::size_t positives, std::size_t negatives) noexcept;

/// Threshold of maximum information gain about is_adversarial.
///
/// Candidates are midpoints between consecutive distinct scores. The split is
/// score < t; ties in gain go to the smallest t. If every score is equal there
/// is no candidate: the threshold is that score (nothing is declared
/// adversarial), the gain 0, and stats.degenerate is set.
/// Throws DataError when `train` lacks either class.
ThresholdModel learn_threshold(std::span<const LabeledScore> train,
                               std::size_t band_index = 0);

inline bool detect(double score, const ThresholdModel& model) noexcept {
  return model.detect(score);
}

/// Per-band thresholds learned on each band's scores in isolation.
std::array<ThresholdModel, kNumBands> learn_band_thresholds(
    std::span<const ScoreVector> train);

/// Declares adversarial when at least `vote_threshold` members vote so.
struct VotingModel {
  std::array<ThresholdModel, kNumBands> members{};
  int vote_threshold = 3;

  int votes(const ScoreVector& v) const noexcept;
  bool detect(const ScoreVector& v) const noexcept {
    return votes(v) >= vote_threshold;
  }
};

/// Fixed k = 3 of 5. Throws ConfigError unless `members` has 5 entries.
bool majority_vote(const ScoreVector& v, std::span<const ThresholdModel> members);

/// Training F1 of the adversarial class for each k in 1..5 (index k - 1).
std::array<double, kNumBands> vote_threshold_f1(
    std::span<const ScoreVector> train,
    const std::array<ThresholdModel, kNumBands>& members);

/// Picks k in 1..5 maximising training F1; ties go to the larger k.
/// Throws DataError when `train` lacks ground truth or either class.
VotingModel learn_vote_threshold(
    std::span<const ScoreVector> train,
    const std::array<ThresholdModel, kNumBands>& members);

}  // namespace nflood
