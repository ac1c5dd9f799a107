#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace nflood {

inline constexpr int kCanonicalSampleRate = 16000;

/// Mono 16-bit PCM audio.
struct AudioSignal {
  std::vector<std::int16_t> samples;
  int sample_rate = kCanonicalSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double nyquist() const noexcept { return sample_rate / 2.0; }

  /// Throws ConfigError unless sample_rate > 0 and the signal is non-empty.
  void validate() const;

  friend bool operator==(const AudioSignal&, const AudioSignal&) = default;
};

/// A closed frequency interval [low_hz, high_hz], or Unfiltered.
class FrequencyBand {
 public:
  /// Same as unfiltered().
  FrequencyBand() = default;

  /// The "no filter" band. The filter stage is skipped entirely.
  static FrequencyBand unfiltered() noexcept { return FrequencyBand{}; }

  /// Throws ConfigError unless 0 <= low_hz < high_hz.
  static FrequencyBand range(double low_hz, double high_hz);

  bool is_unfiltered() const noexcept { return !limits_.has_value(); }
  double low_hz() const;
  double high_hz() const;

  /// "unfiltered" or "<low>-<high>" with integral Hz printed without decimals.
  std::string name() const;

  /// Parses the format produced by name().
  static FrequencyBand parse(const std::string& text);

  friend bool operator==(const FrequencyBand&, const FrequencyBand&) = default;

 private:
  struct Limits {
    double low;
    double high;
    friend bool operator==(const Limits&, const Limits&) = default;
  };
  std::optional<Limits> limits_;
};

/// Real-valued noise amplitudes, one per target sample.
using NoiseArray = std::vector<double>;

/// Random source used for noise synthesis. mt19937_64 output is fully
/// specified by the standard, so a seed reproduces the same stream anywhere.
using NoiseRng = std::mt19937_64;

AudioSignal load_wav(const std::filesystem::path& path);
void save_wav(const AudioSignal& signal, const std::filesystem::path& path);

/// Serialises a signal to the exact bytes save_wav writes.
std::vector<std::uint8_t> encode_wav(const AudioSignal& signal);
/// Parses WAV bytes; `origin` is only used in error messages.
AudioSignal decode_wav(std::span<const std::uint8_t> bytes,
                       const std::string& origin = "<memory>");

/// n independent integers drawn uniformly from [-epsilon, epsilon].
NoiseArray generate_noise(std::size_t n, int epsilon, NoiseRng& rng);

/// Brick-wall band-pass: forward real DFT, zero every bin whose frequency
/// lies outside [low_hz, high_hz], inverse DFT. Bins exactly on an edge are
/// kept. Unfiltered returns the input unchanged.
/// Throws ConfigError when the band's upper edge exceeds sample_rate / 2.
NoiseArray band_pass(const NoiseArray& noise, const FrequencyBand& band,
                     int sample_rate);

/// Element-wise signal + noise, rounded half away from zero and saturated to
/// the int16 range. Throws ConfigError on length mismatch.
AudioSignal mix(const AudioSignal& signal, std::span<const double> noise);

}  // namespace nflood
