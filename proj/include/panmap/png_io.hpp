#pragma once

#include <cstdint>
#include <string>

#include "panmap/image.hpp"

namespace panmap {

// Single-channel 16-bit and RGB 8-bit PNG codecs. All functions throw
// std::runtime_error on I/O or decode failure.
void write_png_gray16(const Image<uint16_t>& image, const std::string& path);
Image<uint16_t> read_png_gray16(const std::string& path);

void write_png_rgb8(const ColorImage& image, const std::string& path);
ColorImage read_png_rgb8(const std::string& path);

}  // namespace panmap
