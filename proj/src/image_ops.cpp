#include "gslift/image_ops.hpp"

#include <algorithm>
#include <cmath>

namespace gslift {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma) {
  if (sigma <= 0.0) return image;
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;

  ImageBuffer tmp(image.width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * image.at(clampi(x + i, 0, image.width - 1), y, c);
        tmp.at(x, y, c) = acc;
      }
  ImageBuffer out(image.width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * tmp.at(x, clampi(y + i, 0, image.height - 1), c);
        out.at(x, y, c) = acc;
      }
  return out;
}

ImageBuffer unsharp_mask(const ImageBuffer& image, double strength, double sigma) {
  ImageBuffer blurred = gaussian_blur(image, sigma);
  ImageBuffer out(image.width, image.height, image.channels);
  for (size_t i = 0; i < image.data.size(); ++i)
    out.data[i] = clamp01(image.data[i] + strength * (image.data[i] - blurred.data[i]));
  return out;
}

double sample_bilinear(const ImageBuffer& image, double x, double y, int c) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  double fx = x - x0, fy = y - y0;
  int x1 = x0 + 1, y1 = y0 + 1;
  x0 = clampi(x0, 0, image.width - 1);
  x1 = clampi(x1, 0, image.width - 1);
  y0 = clampi(y0, 0, image.height - 1);
  y1 = clampi(y1, 0, image.height - 1);
  double v00 = image.at(x0, y0, c), v10 = image.at(x1, y0, c);
  double v01 = image.at(x0, y1, c), v11 = image.at(x1, y1, c);
  return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

ImageBuffer image_diff(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "image_diff");
  ImageBuffer out(a.width, a.height, a.channels);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
  return out;
}

double image_max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "image_max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace gslift
