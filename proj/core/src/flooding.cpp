#include "noiseflood/flooding.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "noiseflood/errors.hpp"
#include "noiseflood/seed.hpp"

namespace nflood {

void FloodingConfig::validate() const {
  if (step_size < 1) throw ConfigError("step size must be at least 1");
  if (epsilon_max < step_size) throw ConfigError("eps_max must be at least the step size");
}

BandPlan::BandPlan()
    : BandPlan({FrequencyBand::unfiltered(), FrequencyBand::range(0, 2000),
                FrequencyBand::range(2000, 4000), FrequencyBand::range(4000, 6000),
                FrequencyBand::range(6000, 8000)}) {}

BandPlan::BandPlan(const std::array<FrequencyBand, kNumBands>& bands) : bands_(bands) {
  if (!bands_[0].is_unfiltered()) throw ConfigError("band 0 must be unfiltered");
  for (std::size_t i = 1; i < kNumBands; ++i) {
    if (bands_[i].is_unfiltered()) {
      throw ConfigError("only band 0 may be unfiltered");
    }
    if (i > 1 && bands_[i].low_hz() != bands_[i - 1].high_hz()) {
      throw ConfigError("filtered bands must be contiguous and ascending");
    }
  }
}

BandPlan BandPlan::from_edges(std::span<const double> edges) {
  if (edges.size() != kNumBands) {
    throw ConfigError("a band plan needs exactly 5 edges");
  }
  std::array<FrequencyBand, kNumBands> bands{
      FrequencyBand::unfiltered(), FrequencyBand::unfiltered(), FrequencyBand::unfiltered(),
      FrequencyBand::unfiltered(), FrequencyBand::unfiltered()};
  for (std::size_t i = 1; i < kNumBands; ++i) {
    bands[i] = FrequencyBand::range(edges[i - 1], edges[i]);
  }
  return BandPlan(bands);
}

BandPlan BandPlan::parse(const std::string& text) {
  std::vector<double> edges;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      edges.push_back(std::stod(item, &used));
      if (used != item.size()) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("bad band edge list '" + text + "'");
    }
  }
  return from_edges(edges);
}

std::array<std::string, kNumBands> BandPlan::column_suffixes() const {
  std::array<std::string, kNumBands> out;
  for (std::size_t i = 0; i < kNumBands; ++i) {
    out[i] = bands_[i].name();
    std::replace(out[i].begin(), out[i].end(), '-', '_');
  }
  return out;
}

std::string BandPlan::edges_string() const {
  std::ostringstream os;
  os.precision(17);
  os << bands_[1].low_hz();
  for (std::size_t i = 1; i < kNumBands; ++i) os << ',' << bands_[i].high_hz();
  return os.str();
}

ScoreVector ScoreVector::assemble(std::span<const BandScore> band_scores, const BandPlan& plan) {
  if (band_scores.size() != kNumBands) {
    throw ConfigError("a score vector needs exactly 5 band scores");
  }
  ScoreVector v;
  for (std::size_t i = 0; i < kNumBands; ++i) {
    if (!(band_scores[i].band == plan[i])) {
      throw ConfigError("band " + band_scores[i].band.name() + " at position " +
                        std::to_string(i) + " breaks canonical order (expected " +
                        plan[i].name() + ")");
    }
    v.scores[i] = band_scores[i].score;
  }
  return v;
}

std::array<double, kNumBands> ScoreVector::features() const noexcept {
  std::array<double, kNumBands> out{};
  for (std::size_t i = 0; i < kNumBands; ++i) out[i] = scores[i].epsilon;
  return out;
}

NoiseArray flooding_noise(std::size_t n, int epsilon, const FrequencyBand& band,
                          int sample_rate, std::uint64_t seed) {
  NoiseRng rng(derive_seed(seed, static_cast<std::uint64_t>(epsilon)));
  return band_pass(generate_noise(n, epsilon, rng), band, sample_rate);
}

FloodingScore flooding_score(const AudioSignal& x, Classifier& model,
                             const FloodingConfig& cfg) {
  cfg.validate();
  x.validate();
  if (!cfg.band.is_unfiltered() && cfg.band.high_hz() > x.nyquist()) {
    throw ConfigError("band " + cfg.band.name() + " exceeds the Nyquist frequency of a " +
                      std::to_string(x.sample_rate) + " Hz signal");
  }

  FloodingScore result;
  const Label original = model.classify(x);
  result.calls_used = 1;
  Label predicted = original;
  int epsilon = 0;
  while (predicted == original && epsilon < cfg.epsilon_max) {
    epsilon += cfg.step_size;
    const auto noise = flooding_noise(x.size(), epsilon, cfg.band, x.sample_rate, cfg.seed);
    predicted = model.classify(mix(x, noise));
    ++result.calls_used;
  }
  result.epsilon = epsilon;
  result.flipped = predicted != original;
  return result;
}

std::uint64_t band_seed(std::uint64_t base_seed, std::size_t band_index) {
  return derive_seed(base_seed, band_index);
}

std::uint64_t row_seed(std::uint64_t run_seed, std::size_t row_index) {
  // Offset keeps row streams distinct from band streams of the same parent.
  return derive_seed(run_seed, 0x100000000ULL + row_index);
}

ScoreVector score_vector(const AudioSignal& x, Classifier& model, const FloodingConfig& base_cfg,
                         const BandPlan& plan) {
  base_cfg.validate();
  std::array<BandScore, kNumBands> parts{};
  for (std::size_t i = 0; i < kNumBands; ++i) {
    FloodingConfig cfg = base_cfg;
    cfg.band = plan[i];
    cfg.seed = band_seed(base_cfg.seed, i);
    parts[i] = BandScore{plan[i], flooding_score(x, model, cfg)};
  }
  return ScoreVector::assemble(parts, plan);
}

DatasetScores score_dataset(std::span<const ManifestRow> rows, Classifier& model,
                            const FloodingConfig& base_cfg, const BandPlan& plan,
                            std::size_t workers, const ProgressCallback& progress) {
  base_cfg.validate();
  const std::size_t total = rows.size();
  std::vector<std::optional<ScoreVector>> results(total);
  std::vector<std::optional<RowFailure>> failures(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      const ManifestRow& row = rows[i];
      try {
        const AudioSignal x = load_wav(row.resolved.empty() ? std::filesystem::path(row.path) : row.resolved);
        FloodingConfig cfg = base_cfg;
        cfg.seed = row_seed(base_cfg.seed, i);
        ScoreVector v = score_vector(x, model, cfg, plan);
        v.id = row.id;
        v.path = row.path;
        v.is_adversarial = row.is_adversarial;
        v.source = row.source;
        v.target = row.target;
        results[i] = std::move(v);
      } catch (const ClassifierError& e) {
        failures[i] = RowFailure{i, row.id, e.what(), true};
      } catch (const std::exception& e) {
        failures[i] = RowFailure{i, row.id, e.what(), false};
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };

  const std::size_t pool = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(total, 1));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(work);
  }

  DatasetScores out;
  for (std::size_t i = 0; i < total; ++i) {
    if (results[i]) out.vectors.push_back(std::move(*results[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  return out;
}

}  // namespace nflood
