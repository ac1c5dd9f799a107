#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "noiseflood/audio.hpp"

namespace nflood {

using Label = std::string;

/// The model queried by the flooding search.
///
/// classify() must be a pure function of its input for a fixed instance.
/// Every call is counted; the counter is what the flooding tests use to check
/// the per-score call bound.
class Classifier {
 public:
  virtual ~Classifier() = default;

  Label classify(const AudioSignal& x);

  virtual const std::vector<Label>& vocabulary() const = 0;

  std::uint64_t call_count() const noexcept {
    return calls_.load(std::memory_order_relaxed);
  }

 protected:
  virtual Label do_classify(const AudioSignal& x) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

/// Per-band spectral energy of `x` over the sub-bands delimited by `edges`.
///
/// Bin j (frequency j * rate / n) belongs to band k when
/// edges[k] <= f < edges[k + 1]; the last band also takes f == edges.back().
/// Energies are one-sided and Parseval-normalised so that they sum to
/// sum(x[i]^2) when the edges cover [0, nyquist].
std::vector<double> band_energies(const AudioSignal& x,
                                  const std::vector<double>& edges);

/// Argmax of weighted sub-band energy. Ties go to the lowest band index, so
/// silence maps to band 0.
///
/// Injected noise moves a label only when it lifts a rival band's weighted
/// energy above the current winner's, which makes flip amplitudes predictable
/// from the signal's per-band margins.
class BandEnergyClassifier final : public Classifier {
 public:
  struct Options {
    std::vector<double> edges{0.0, 2000.0, 4000.0, 6000.0, 8000.0};
    std::vector<Label> labels{"low", "lowmid", "highmid", "high"};
    std::vector<double> weights{1.0, 0.8, 0.6, 0.4};
  };

  BandEnergyClassifier();
  explicit BandEnergyClassifier(Options options);

  const std::vector<Label>& vocabulary() const override {
    return options_.labels;
  }
  const Options& options() const noexcept { return options_; }

  /// Index of the winning band without touching the call counter.
  std::size_t winning_band(const AudioSignal& x) const;

 protected:
  Label do_classify(const AudioSignal& x) override;

 private:
  Options options_;
};

/// Child process speaking the line protocol:
///
///   child  -> VOCAB <label> <label> ...
///   child  -> READY
///   parent -> CLASSIFY <absolute path to 16-bit mono WAV>
///   child  -> LABEL <label>
///   parent -> QUIT
///
/// Each classify() writes the signal to a private temporary WAV and performs
/// one request/response exchange. Calls are serialised; one request is in
/// flight at a time. Models whose answers vary between identical requests are
/// unsupported: flooding scores are undefined for them.
class ExternalClassifier final : public Classifier {
 public:
  ~ExternalClassifier() override;
  ExternalClassifier(const ExternalClassifier&) = delete;
  ExternalClassifier& operator=(const ExternalClassifier&) = delete;

  const std::vector<Label>& vocabulary() const override;
  int pid() const noexcept;

 protected:
  Label do_classify(const AudioSignal& x) override;

 private:
  struct Impl;
  explicit ExternalClassifier(std::unique_ptr<Impl> impl);
  friend std::unique_ptr<ExternalClassifier> spawn_external(
      const std::vector<std::string>&, std::chrono::milliseconds);
  std::unique_ptr<Impl> impl_;
};

inline constexpr std::chrono::milliseconds kDefaultResponseTimeout{30000};

/// Starts `argv[0]` (PATH lookup) with the remaining arguments and waits for
/// the VOCAB/READY handshake. Throws SpawnError when the process cannot be
/// started or does not complete the handshake within `timeout`.
std::unique_ptr<ExternalClassifier> spawn_external(
    const std::vector<std::string>& argv,
    std::chrono::milliseconds timeout = kDefaultResponseTimeout);

/// Builds a classifier from a CLI-style spec: `builtin:band-energy` or
/// `exec:<command and whitespace-separated args>`.
std::unique_ptr<Classifier> make_classifier(
    const std::string& spec,
    std::chrono::milliseconds timeout = kDefaultResponseTimeout);

}  // namespace nflood
