#include "noiseflood/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "noiseflood/errors.hpp"
#include "spectrum.hpp"

namespace nflood {

Label Classifier::classify(const AudioSignal& x) {
  x.validate();
  calls_.fetch_add(1, std::memory_order_relaxed);
  return do_classify(x);
}

std::vector<double> band_energies(const AudioSignal& x, const std::vector<double>& edges) {
  if (edges.size() < 2) throw ConfigError("need at least two band edges");
  const std::size_t n = x.samples.size();
  std::vector<double> data(x.samples.begin(), x.samples.end());
  const auto bins = detail::real_dft(data);

  std::vector<double> energy(edges.size() - 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < bins.size(); ++j) {
    const double freq = static_cast<double>(j) * x.sample_rate * inv_n;
    if (freq < edges.front() || freq > edges.back()) continue;
    // Interior bins stand for both +f and -f.
    const bool self_conjugate = j == 0 || (n % 2 == 0 && j == n / 2);
    const double e = (self_conjugate ? 1.0 : 2.0) * std::norm(bins[j]) * inv_n;
    auto upper = std::upper_bound(edges.begin(), edges.end(), freq);
    std::size_t band = static_cast<std::size_t>(upper - edges.begin()) - 1;
    band = std::min(band, energy.size() - 1);
    energy[band] += e;
  }
  return energy;
}

BandEnergyClassifier::BandEnergyClassifier() : BandEnergyClassifier(Options{}) {}

BandEnergyClassifier::BandEnergyClassifier(Options options) : options_(std::move(options)) {
  const auto& o = options_;
  if (o.labels.empty()) throw ConfigError("classifier vocabulary is empty");
  if (o.edges.size() != o.labels.size() + 1 || o.weights.size() != o.labels.size()) {
    throw ConfigError("band-energy classifier needs K labels, K weights and K+1 edges");
  }
  if (!std::is_sorted(o.edges.begin(), o.edges.end()) ||
      std::adjacent_find(o.edges.begin(), o.edges.end()) != o.edges.end()) {
    throw ConfigError("band edges must be strictly increasing");
  }
  if (std::any_of(o.weights.begin(), o.weights.end(),
                  [](double w) { return !(w > 0.0) || !std::isfinite(w); })) {
    throw ConfigError("band weights must be positive and finite");
  }
}

std::size_t BandEnergyClassifier::winning_band(const AudioSignal& x) const {
  const auto energy = band_energies(x, options_.edges);
  std::size_t best = 0;
  double best_value = energy[0] * options_.weights[0];
  for (std::size_t k = 1; k < energy.size(); ++k) {
    const double value = energy[k] * options_.weights[k];
    if (value > best_value) {
      best = k;
      best_value = value;
    }
  }
  return best;
}

Label BandEnergyClassifier::do_classify(const AudioSignal& x) {
  return options_.labels[winning_band(x)];
}

std::unique_ptr<Classifier> make_classifier(const std::string& spec,
                                            std::chrono::milliseconds timeout) {
  if (spec == "builtin:band-energy") return std::make_unique<BandEnergyClassifier>();
  constexpr std::string_view kExec = "exec:";
  if (spec.rfind(kExec, 0) == 0) {
    std::istringstream words(spec.substr(kExec.size()));
    std::vector<std::string> argv;
    for (std::string w; words >> w;) argv.push_back(w);
    if (argv.empty()) throw ConfigError("exec: classifier needs a command");
    return spawn_external(argv, timeout);
  }
  throw ConfigError("unknown classifier '" + spec +
                    "' (expected builtin:band-energy or exec:<command>)");
}

}  // namespace nflood
