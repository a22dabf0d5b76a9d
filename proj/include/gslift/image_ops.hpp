#pragma once

#include "gslift/types.hpp"

namespace gslift {

// Separable Gaussian blur with replicate borders; sigma <= 0 is identity.
// Kernel radius ceil(3 sigma).
ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma);

// Unsharp mask: image + strength * (image - blur(image, sigma)), clamped
// to [0,1].
ImageBuffer unsharp_mask(const ImageBuffer& image, double strength, double sigma);

// Bilinear sample with replicate borders; x,y in pixel coordinates where
// (0,0) is the center of the top-left pixel.
double sample_bilinear(const ImageBuffer& image, double x, double y, int c);

// a - b elementwise.
ImageBuffer image_diff(const ImageBuffer& a, const ImageBuffer& b);

double image_max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace gslift
