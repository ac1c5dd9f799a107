#include "fixtures.hpp"

#include <atomic>
#include <random>

#include <unistd.h>

#include <noiseflood/audio.hpp>

#ifndef NFLOOD_STUB_CLASSIFIER
#error "NFLOOD_STUB_CLASSIFIER must name the stub executable"
#endif

namespace nflood::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const std::vector<SyntheticSignal>& signals,
                                              const std::string& id_prefix) {
  static const std::vector<Label> targets{"lowmid", "highmid", "high"};
  std::filesystem::create_directories(dir / "wav");
  std::vector<ManifestRow> rows;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    ManifestRow row;
    row.id = id_prefix + std::to_string(i);
    row.path = "wav/" + row.id + ".wav";
    save_wav(signals[i].audio, dir / row.path);
    row.is_adversarial = signals[i].fragile;
    if (signals[i].fragile) {
      row.source = "low";
      row.target = targets[i % targets.size()];
    }
    rows.push_back(row);
  }
  const auto manifest = dir / "manifest.csv";
  save_manifest(rows, manifest);
  return manifest;
}

std::filesystem::path stub_classifier_path() { return NFLOOD_STUB_CLASSIFIER; }

}  // namespace nflood::testing
