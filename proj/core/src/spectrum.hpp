#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nflood::detail {

using Spectrum = std::vector<std::complex<double>>;

/// One-sided DFT of a real sequence: n / 2 + 1 bins, unnormalised.
Spectrum real_dft(std::span<const double> data);

/// Inverse of real_dft, divided by n. `n` is the original length.
std::vector<double> inverse_real_dft(const Spectrum& bins, std::size_t n);

}  // namespace nflood::detail
