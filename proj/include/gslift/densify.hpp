#pragma once

#include <cstddef>

#include "gslift/types.hpp"

namespace gslift {

struct DensifyParams {
  double grad_threshold = 0.01;       // mean 2D positional gradient magnitude
  double prune_opacity = 0.01;        // remove splats with alpha below this
  double split_scale_fraction = 0.01;  // of scene_extent: split above, clone below
  double scene_extent = 1.0;
};

struct DensifyReport {
  size_t before = 0;
  size_t splits = 0;
  size_t clones = 0;
  size_t pruned = 0;
  size_t after = 0;  // == before + splits + clones - pruned
};

// Half diagonal of the center bounding box; the scale yardstick for splits.
double cloud_extent(const GaussianCloud& cloud);

// Adaptive density control. Primitives whose accumulated mean positional
// gradient exceeds the threshold are split (large ones: two children at
// +-0.5 sigma along the largest axis, scales / 1.6) or cloned (small ones:
// copy offset along the descent direction). Afterwards near-transparent
// primitives are pruned and the accumulators reset.
DensifyReport densify_and_prune(GaussianCloud& cloud, const DensifyParams& params);

}  // namespace gslift
