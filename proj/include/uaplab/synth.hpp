#pragma once

#include <cstdint>

#include "uaplab/data.hpp"

namespace uaplab {

// Procedurally rendered 10-class corpora, 28x28 grayscale, deterministic
// per seed. Pixels are quantized to u8 levels so IDX round-trips are
// bit-exact. `digits` draws jittered glyphs 0-9 (the victim's domain);
// `clothing` draws garment silhouettes (the disjoint proxy domain).
DatasetHandle synth_digits(std::size_t n, std::uint64_t seed);
DatasetHandle synth_clothing(std::size_t n, std::uint64_t seed);

} // namespace uaplab
