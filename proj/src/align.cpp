#include "gslift/align.hpp"

#include <cmath>

#include "gslift/error.hpp"
#include "gslift/image_ops.hpp"

namespace gslift {

AlignResult align_landmarks(const std::vector<Vec2>& src, const std::vector<Vec2>& dst) {
  if (src.size() != dst.size())
    throw Error(ErrorCode::dimension_mismatch, "landmark counts differ");
  if (src.size() < 2) throw Error(ErrorCode::degenerate_rank, "need at least two landmarks");

  size_t n = src.size();
  Vec2 mean_src = Vec2::Zero(), mean_dst = Vec2::Zero();
  for (size_t i = 0; i < n; ++i) {
    mean_src += src[i];
    mean_dst += dst[i];
  }
  mean_src /= static_cast<double>(n);
  mean_dst /= static_cast<double>(n);

  double dot = 0, cross = 0, norm_src = 0;
  for (size_t i = 0; i < n; ++i) {
    Vec2 p = src[i] - mean_src;
    Vec2 q = dst[i] - mean_dst;
    dot += p.x() * q.x() + p.y() * q.y();
    cross += p.x() * q.y() - p.y() * q.x();
    norm_src += p.squaredNorm();
  }
  if (norm_src <= 0) throw Error(ErrorCode::degenerate_rank, "landmarks coincide");

  AlignResult res;
  res.transform.rotation_rad = std::atan2(cross, dot);
  res.transform.scale = std::sqrt(dot * dot + cross * cross) / norm_src;
  Vec2 rotated = res.transform.scale *
                 Vec2(std::cos(res.transform.rotation_rad) * mean_src.x() -
                          std::sin(res.transform.rotation_rad) * mean_src.y(),
                      std::sin(res.transform.rotation_rad) * mean_src.x() +
                          std::cos(res.transform.rotation_rad) * mean_src.y());
  res.transform.translation = mean_dst - rotated;

  double sq = 0;
  for (size_t i = 0; i < n; ++i) sq += (res.transform.apply(src[i]) - dst[i]).squaredNorm();
  res.rmse = std::sqrt(sq / static_cast<double>(n));
  return res;
}

ImageBuffer compose_aligned_image(const ImageBuffer& hair_rgb, const ImageBuffer& hair_alpha,
                                  const ImageBuffer& body, const SimilarityTransform2D& xf) {
  if (hair_rgb.channels != 3 || body.channels != 3 || hair_alpha.channels != 1 ||
      hair_alpha.width != hair_rgb.width || hair_alpha.height != hair_rgb.height)
    throw Error(ErrorCode::dimension_mismatch, "compose inputs");

  ImageBuffer out = body;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      Vec2 p = xf.apply_inverse(Vec2(x, y));
      if (p.x() < -0.5 || p.x() > hair_rgb.width - 0.5 || p.y() < -0.5 ||
          p.y() > hair_rgb.height - 0.5)
        continue;
      double a = sample_bilinear(hair_alpha, p.x(), p.y(), 0);
      if (a <= 0) continue;
      for (int c = 0; c < 3; ++c) {
        double h = sample_bilinear(hair_rgb, p.x(), p.y(), c);
        out.at(x, y, c) = a * h + (1.0 - a) * out.at(x, y, c);
      }
    }
  return out;
}

}  // namespace gslift
