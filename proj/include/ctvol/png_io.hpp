#pragma once

#include <cstdint>
#include <vector>

#include "ctvol/volume.hpp"

namespace ctvol {

// Encode as 8-bit grayscale PNG. Pixels quantize to round(v * 255); the
// decode side divides by 255, so masks ({0,1}) round-trip bit-exactly.
std::vector<std::uint8_t> encode_png(const Image& img);

// Decode an 8-bit grayscale non-interlaced PNG (the only flavor this
// project writes). All five scanline filters are handled.
Image decode_png(const std::vector<std::uint8_t>& bytes);

}  // namespace ctvol
