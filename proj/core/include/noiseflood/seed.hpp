#pragma once

#include <cstdint>

namespace nflood {

/// Derives an independent child seed from a parent seed and a stream index.
///
/// The mix is splitmix64 applied to `parent` and then to the combination with
/// `stream`, so neighbouring indices land on unrelated seeds. All per-row,
/// per-band and per-amplitude seeds in the library come from this function;
/// changing it changes every recorded score.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept;

}  // namespace nflood
