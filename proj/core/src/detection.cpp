#include "noiseflood/detection.hpp"

#include <algorithm>
#include <cmath>

#include "noiseflood/errors.hpp"
#include "noiseflood/evaluation.hpp"

namespace nflood {
namespace {

// Gains closer than this are treated as equal so ties resolve by position.
constexpr double kGainTolerance = 1e-12;

}  // namespace

double binary_entropy(std::size_t positives, std::size_t negatives) noexcept {
  if (positives == 0 || negatives == 0) return 0.0;
  const double total = static_cast<double>(positives + negatives);
  const double p = static_cast<double>(std::min(positives, negatives)) / total;
  const double q = static_cast<double>(std::max(positives, negatives)) / total;
  return -(p * std::log2(p) + q * std::log2(q));
}

ThresholdModel learn_threshold(std::span<const LabeledScore> train, std::size_t band_index) {
  std::vector<LabeledScore> sorted(train.begin(), train.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score < b.score; });

  ThresholdModel model;
  model.band_index = band_index;
  for (const auto& s : sorted) {
    if (!std::isfinite(s.score)) throw DataError("flooding scores must be finite");
    (s.is_adversarial ? model.stats.adversarial : model.stats.benign)++;
  }
  if (model.stats.adversarial == 0 || model.stats.benign == 0) {
    throw DataError("threshold learning needs both adversarial and benign examples");
  }

  const std::size_t n = sorted.size();
  const double parent = binary_entropy(model.stats.adversarial, model.stats.benign);
  std::size_t left_adv = 0;
  std::size_t left_benign = 0;
  bool found = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    (sorted[i].is_adversarial ? left_adv : left_benign)++;
    if (sorted[i].score == sorted[i + 1].score) continue;
    const std::size_t right_adv = model.stats.adversarial - left_adv;
    const std::size_t right_benign = model.stats.benign - left_benign;
    const double left_n = static_cast<double>(left_adv + left_benign);
    const double right_n = static_cast<double>(right_adv + right_benign);
    const double gain = parent - (left_n / n) * binary_entropy(left_adv, left_benign) -
                        (right_n / n) * binary_entropy(right_adv, right_benign);
    if (!found || gain > model.stats.info_gain + kGainTolerance) {
      model.threshold = (sorted[i].score + sorted[i + 1].score) / 2.0;
      model.stats.info_gain = gain;
      found = true;
    }
  }
  if (!found) {
    model.threshold = sorted.front().score;
    model.stats.info_gain = 0.0;
    model.stats.degenerate = true;
  }
  return model;
}

std::array<ThresholdModel, kNumBands> learn_band_thresholds(std::span<const ScoreVector> train) {
  std::array<ThresholdModel, kNumBands> members{};
  for (std::size_t band = 0; band < kNumBands; ++band) {
    std::vector<LabeledScore> scores;
    scores.reserve(train.size());
    for (const auto& v : train) {
      if (!v.is_adversarial) throw DataError("training row '" + v.id + "' has no ground truth");
      scores.push_back({static_cast<double>(v.scores[band].epsilon), *v.is_adversarial});
    }
    members[band] = learn_threshold(scores, band);
  }
  return members;
}

int VotingModel::votes(const ScoreVector& v) const noexcept {
  int count = 0;
  for (std::size_t i = 0; i < kNumBands; ++i) {
    if (members[i].detect(v.scores[i].epsilon)) ++count;
  }
  return count;
}

bool majority_vote(const ScoreVector& v, std::span<const ThresholdModel> members) {
  if (members.size() != kNumBands) {
    throw ConfigError("majority vote needs exactly 5 members, got " +
                      std::to_string(members.size()));
  }
  VotingModel model;
  std::copy(members.begin(), members.end(), model.members.begin());
  model.vote_threshold = 3;
  return model.detect(v);
}

std::array<double, kNumBands> vote_threshold_f1(
    std::span<const ScoreVector> train, const std::array<ThresholdModel, kNumBands>& members) {
  std::array<ConfusionCounts, kNumBands> counts{};
  VotingModel model{members, 1};
  for (const auto& v : train) {
    if (!v.is_adversarial) throw DataError("training row '" + v.id + "' has no ground truth");
    const int votes = model.votes(v);
    for (int k = 1; k <= static_cast<int>(kNumBands); ++k) {
      auto& c = counts[k - 1];
      const bool declared = votes >= k;
      if (*v.is_adversarial) {
        (declared ? c.tp : c.fn)++;
      } else {
        (declared ? c.fp : c.tn)++;
      }
    }
  }
  std::array<double, kNumBands> f1{};
  for (std::size_t i = 0; i < kNumBands; ++i) f1[i] = counts[i].f1();
  return f1;
}

VotingModel learn_vote_threshold(std::span<const ScoreVector> train,
                                 const std::array<ThresholdModel, kNumBands>& members) {
  std::size_t adversarial = 0;
  for (const auto& v : train) {
    if (!v.is_adversarial) throw DataError("training row '" + v.id + "' has no ground truth");
    adversarial += *v.is_adversarial ? 1 : 0;
  }
  if (adversarial == 0 || adversarial == train.size()) {
    throw DataError("vote threshold learning needs both adversarial and benign examples");
  }
  const auto f1 = vote_threshold_f1(train, members);
  VotingModel model{members, 1};
  double best = f1[0];
  for (int k = 2; k <= static_cast<int>(kNumBands); ++k) {
    if (f1[k - 1] >= best) {
      best = f1[k - 1];
      model.vote_threshold = k;
    }
  }
  return model;
}

}  // namespace nflood
