#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <noiseflood/classifier.hpp>
#include <noiseflood/manifest.hpp>

#include "synthetic.hpp"

namespace nflood::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "nflood");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Always answers "same".
class NeverFlipClassifier final : public Classifier {
 public:
  const std::vector<Label>& vocabulary() const override { return vocab_; }

 protected:
  Label do_classify(const AudioSignal&) override { return vocab_[0]; }

 private:
  std::vector<Label> vocab_{"same", "other"};
};

/// "same" for the reference signal, "other" for anything else.
class FlipOnChangeClassifier final : public Classifier {
 public:
  explicit FlipOnChangeClassifier(AudioSignal reference) : reference_(std::move(reference)) {}
  const std::vector<Label>& vocabulary() const override { return vocab_; }

 protected:
  Label do_classify(const AudioSignal& x) override {
    return x == reference_ ? vocab_[0] : vocab_[1];
  }

 private:
  AudioSignal reference_;
  std::vector<Label> vocab_{"same", "other"};
};

/// Writes each signal as <dir>/<id>.wav and a manifest at <dir>/manifest.csv.
/// Fragile signals are marked adversarial with source "low" and a target
/// cycling through the other labels; robust ones are benign.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const std::vector<SyntheticSignal>& signals,
                                              const std::string& id_prefix = "sig");

/// Path of the stub classifier executable built alongside the tests.
std::filesystem::path stub_classifier_path();

}  // namespace nflood::testing
