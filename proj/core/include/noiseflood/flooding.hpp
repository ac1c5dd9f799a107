#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noiseflood/audio.hpp"
#include "noiseflood/classifier.hpp"
#include "noiseflood/manifest.hpp"

namespace nflood {

inline constexpr int kDefaultStepSize = 50;
inline constexpr int kDefaultEpsilonMax = 2500;
inline constexpr std::size_t kNumBands = 5;

struct FloodingConfig {
  int step_size = kDefaultStepSize;
  int epsilon_max = kDefaultEpsilonMax;
  FrequencyBand band = FrequencyBand::unfiltered();
  std::uint64_t seed = 0;

  /// Throws ConfigError unless step_size >= 1 and epsilon_max >= step_size.
  void validate() const;
};

struct FloodingScore {
  /// Smallest tested bound that changed the prediction, or the last bound
  /// tested (the first multiple of the step >= epsilon_max) when none did.
  int epsilon = 0;
  bool flipped = false;
  /// Classifier invocations including the initial unperturbed one.
  std::uint64_t calls_used = 0;

  friend bool operator==(const FloodingScore&, const FloodingScore&) = default;
};

/// The five flooding bands in canonical order: Unfiltered followed by four
/// contiguous ascending ranges (0-2000, 2000-4000, 4000-6000, 6000-8000 Hz by
/// default).
class BandPlan {
 public:
  BandPlan();
  /// Throws ConfigError unless `bands` is in canonical order.
  explicit BandPlan(const std::array<FrequencyBand, kNumBands>& bands);

  /// Five ascending edges define the four filtered bands.
  static BandPlan from_edges(std::span<const double> edges);
  /// Parses a comma separated edge list such as "0,2000,4000,6000,8000".
  static BandPlan parse(const std::string& text);

  const FrequencyBand& operator[](std::size_t i) const { return bands_[i]; }
  const std::array<FrequencyBand, kNumBands>& bands() const noexcept {
    return bands_;
  }
  /// Column suffixes: "unfiltered", "0_2000", ...
  std::array<std::string, kNumBands> column_suffixes() const;
  std::string edges_string() const;

  friend bool operator==(const BandPlan&, const BandPlan&) = default;

 private:
  std::array<FrequencyBand, kNumBands> bands_;
};

struct BandScore {
  FrequencyBand band;
  FloodingScore score;
};

/// Per-band flooding scores of one signal plus optional ground truth.
struct ScoreVector {
  std::string id;
  std::string path;
  std::array<FloodingScore, kNumBands> scores{};
  std::optional<bool> is_adversarial;
  std::optional<Label> source;
  std::optional<Label> target;

  /// Builds the vector from per-band results. Throws ConfigError if the bands
  /// are not exactly `plan`'s bands in canonical order.
  static ScoreVector assemble(std::span<const BandScore> band_scores,
                              const BandPlan& plan = BandPlan{});

  /// The epsilons as the 5-dimensional feature vector.
  std::array<double, kNumBands> features() const noexcept;
};

/// Noise injected at amplitude `epsilon` for a search seeded with `seed`:
/// fresh uniform integers in [-epsilon, epsilon] from a stream seeded with
/// derive_seed(seed, epsilon), then band-pass filtered. Each amplitude gets
/// its own draw, so the noise at a given epsilon does not depend on the step
/// size that reached it.
NoiseArray flooding_noise(std::size_t n, int epsilon, const FrequencyBand& band,
                          int sample_rate, std::uint64_t seed);

/// Smallest step multiple whose noise changes the classifier's prediction.
///
///   pred_orig = classify(x); eps = 0
///   while pred == pred_orig and eps < eps_max:
///     eps += s; pred = classify(mix(x, flooding_noise(eps)))
///
/// Makes at most ceil(eps_max / s) calls inside the loop.
FloodingScore flooding_score(const AudioSignal& x, Classifier& model,
                             const FloodingConfig& cfg);

/// Seed used for band `band_index` of a vector seeded with `base_seed`.
std::uint64_t band_seed(std::uint64_t base_seed, std::size_t band_index);
/// Seed used for manifest row `row_index` under run seed `run_seed`.
std::uint64_t row_seed(std::uint64_t run_seed, std::size_t row_index);

/// Runs flooding_score once per band of `plan` with seeds
/// band_seed(base_cfg.seed, i). base_cfg.band is ignored.
ScoreVector score_vector(const AudioSignal& x, Classifier& model,
                         const FloodingConfig& base_cfg,
                         const BandPlan& plan = BandPlan{});

struct RowFailure {
  std::size_t row_index = 0;
  std::string id;
  std::string message;
  bool classifier_error = false;
};

struct DatasetScores {
  std::vector<ScoreVector> vectors;
  std::vector<RowFailure> failures;
};

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Scores every manifest row. Row i uses seed row_seed(base_cfg.seed, i), so
/// the output is independent of `workers`. Output preserves manifest order;
/// a failing row is recorded and skipped, never aborting the batch.
DatasetScores score_dataset(std::span<const ManifestRow> rows,
                            Classifier& model, const FloodingConfig& base_cfg,
                            const BandPlan& plan = BandPlan{},
                            std::size_t workers = 1,
                            const ProgressCallback& progress = {});

}  // namespace nflood
