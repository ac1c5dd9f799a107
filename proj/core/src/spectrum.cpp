#include "spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace nflood::detail {
namespace {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> allocate(std::size_t count) {
  auto* raw = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
  if (raw == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(raw);
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// The FFTW planner is not thread safe; plan execution with the new-array
// interface is. Plans are created once per length and live for the process.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.backward);
    }
  }

  PlanPair get(std::size_t n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    auto real = allocate<double>(n);
    auto bins = allocate<fftw_complex>(n / 2 + 1);
    const int len = static_cast<int>(n);
    PlanPair plans;
    plans.forward = fftw_plan_dft_r2c_1d(len, real.get(), bins.get(), FFTW_ESTIMATE);
    plans.backward = fftw_plan_dft_c2r_1d(len, bins.get(), real.get(), FFTW_ESTIMATE);
    plans_.emplace(n, plans);
    return plans;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

Spectrum real_dft(std::span<const double> data) {
  const std::size_t n = data.size();
  if (n == 0) return {};
  const PlanPair plans = plan_cache().get(n);
  auto in = allocate<double>(n);
  auto out = allocate<fftw_complex>(n / 2 + 1);
  std::copy(data.begin(), data.end(), in.get());
  fftw_execute_dft_r2c(plans.forward, in.get(), out.get());
  Spectrum bins(n / 2 + 1);
  for (std::size_t j = 0; j < bins.size(); ++j) {
    bins[j] = {out[j][0], out[j][1]};
  }
  return bins;
}

std::vector<double> inverse_real_dft(const Spectrum& bins, std::size_t n) {
  if (n == 0) return {};
  const PlanPair plans = plan_cache().get(n);
  auto in = allocate<fftw_complex>(n / 2 + 1);
  auto out = allocate<double>(n);
  for (std::size_t j = 0; j < n / 2 + 1; ++j) {
    in[j][0] = bins[j].real();
    in[j][1] = bins[j].imag();
  }
  fftw_execute_dft_c2r(plans.backward, in.get(), out.get());
  std::vector<double> result(out.get(), out.get() + n);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : result) v *= scale;
  return result;
}

}  // namespace nflood::detail
