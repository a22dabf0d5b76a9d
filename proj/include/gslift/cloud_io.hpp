#pragma once

#include <string>

#include "gslift/types.hpp"

namespace gslift {

// Binary cloud format: 8-byte magic "GSLIFT01", little-endian u32 count,
// then per primitive 14 little-endian f32: center xyz, log_scale xyz,
// rotation wxyz, opacity_logit, color rgb.
void save_cloud(const GaussianCloud& cloud, const std::string& path);
GaussianCloud load_cloud(const std::string& path);

}  // namespace gslift
