#pragma once

#include <vector>

#include "gslift/types.hpp"

namespace gslift {

// Screen-space footprint of one primitive under a camera.
struct ProjectedGaussian {
  Vec2 mean2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Zero();  // includes the low-pass diagonal term
  double depth = 0.0;         // camera-space z
  double opacity = 0.0;       // sigmoid of the stored logit
  bool visible = false;
};

constexpr double kNearPlane = 0.05;
constexpr double kLowPass = 0.3;          // px^2 added to cov2d diagonal
constexpr double kSingularDet = 1e-12;    // cov2d below this is skipped
constexpr double kFootprintSigma = 3.0;   // cull radius in standard deviations

// EWA projection of every primitive: perspective-linearized 2D covariance
// J W Sigma W^T J^T plus kLowPass * I. Culls primitives behind the near
// plane or with a 3-sigma footprint entirely off screen; culled entries
// have visible=false. Counters accumulate into stats when given.
std::vector<ProjectedGaussian> project(const GaussianCloud& cloud, const Camera& camera,
                                       RenderStats* stats = nullptr);

}  // namespace gslift
