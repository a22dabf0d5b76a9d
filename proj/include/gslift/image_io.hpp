#pragma once

#include <string>

#include "gslift/types.hpp"

namespace gslift {

// 8-bit PNG, grayscale or RGB by channel count. Values are clamped to [0,1]
// and quantized with round(v * 255); no gamma transform is applied.
void write_png(const ImageBuffer& image, const std::string& path);
ImageBuffer read_png(const std::string& path);

}  // namespace gslift
