#pragma once

#include <vector>

#include "gslift/types.hpp"

namespace gslift {

struct AlignResult {
  SimilarityTransform2D transform;
  double rmse = 0;  // residual after applying the recovered transform
};

// Closed-form least-squares similarity (rotation + isotropic scale +
// translation, no reflection) mapping src points onto dst points.
AlignResult align_landmarks(const std::vector<Vec2>& src, const std::vector<Vec2>& dst);

// Warp hair (rgb + single-channel alpha) into the body frame with bilinear
// resampling and composite over the body image. Hair pixels mapping outside
// the body frame are dropped.
ImageBuffer compose_aligned_image(const ImageBuffer& hair_rgb, const ImageBuffer& hair_alpha,
                                  const ImageBuffer& body, const SimilarityTransform2D& xf);

}  // namespace gslift
