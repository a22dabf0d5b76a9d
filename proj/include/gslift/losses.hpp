#pragma once

#include <vector>

#include "gslift/oracle.hpp"
#include "gslift/render.hpp"
#include "gslift/schedule.hpp"
#include "gslift/types.hpp"

namespace gslift {

// Mean absolute difference. With a mask (single channel, threshold 0.5) the
// mean runs over included pixels only; an all-excluded mask is an error.
double l1(const ImageBuffer& a, const ImageBuffer& b, const ImageBuffer* mask = nullptr);

// 10 log10(1 / MSE), capped at 100 dB for identical inputs.
double psnr(const ImageBuffer& a, const ImageBuffer& b, const ImageBuffer* mask = nullptr);

struct ReferenceLossResult {
  double loss = 0;
  ImageBuffer d_rgb;    // dL/drgb
  ImageBuffer d_alpha;  // dL/dalpha
};

// L1 on rgb against the reference image plus L1 on accumulated alpha against
// its mask, each term averaged over its own elements.
ReferenceLossResult reference_loss(const RenderedView& rendered, const ImageBuffer& target_rgb,
                                   const ImageBuffer& target_mask);

// Multi-scale feature stack standing in for a learned extractor: 4 levels of
// binomial-blur + downsample-by-2, each passed through a fixed seeded bank of
// eight 3x3x3 filters with absolute-value activation.
struct FeaturePyramid {
  std::vector<ImageBuffer> levels;  // 8-channel maps, level k is ceil(w/2^k) x ceil(h/2^k)
};

FeaturePyramid feature_pyramid(const ImageBuffer& image);

struct PerceptualResult {
  double loss = 0;
  ImageBuffer d_a;  // dL/da
};

// Sum over levels of the mean absolute feature difference, with the gradient
// for the first argument back-propagated through the fixed convolutions.
PerceptualResult perceptual(const ImageBuffer& a, const ImageBuffer& b);

// Metric variant evaluated on mask-multiplied inputs (single-channel mask).
double masked_perceptual(const ImageBuffer& a, const ImageBuffer& b, const ImageBuffer& mask);

// Score-distillation upstream gradient: diffuse the render to x_t, query the
// prior's noise prediction, return w(t) (eps_hat - eps) with w = 1 - alpha_bar_t.
ImageBuffer sds_grad(const RenderedView& rendered, const ImageBuffer& condition,
                     const RelativePose& rel_pose, int t, const ImageBuffer& eps,
                     const SynthesizerOracle& oracle, const NoiseSchedule& schedule);

}  // namespace gslift
