#pragma once

#include <string>

#include "uaplab/net.hpp"

namespace uaplab {

// SNET model container: magic "SNET", version u16 LE, class count u16,
// layer count u16, then per layer: kind u8, extent count u32, extents u32
// each, parameter payload as little-endian f32 (conv: weights then bias;
// dense: weights then bias; other kinds carry none).
void save_snet(const Classifier& net, const std::string& path);
Classifier load_snet(const std::string& path);

} // namespace uaplab
