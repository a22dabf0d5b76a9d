#pragma once

#include <vector>

#include "gslift/types.hpp"

namespace gslift {

constexpr double kMinTransmittance = 1e-4;  // compositing early-stop
constexpr double kAlphaClamp = 0.99;        // per-splat alpha ceiling
constexpr int kTileSize = 16;

// Per-primitive loss partials w.r.t. the stored parameters, i.e. after the
// exp / sigmoid / quaternion-normalization / color-clamp reparameterizations.
struct GradientBundle {
  size_t n = 0;
  std::vector<double> d_center;         // 3n
  std::vector<double> d_log_scale;      // 3n
  std::vector<double> d_rotation;       // 4n
  std::vector<double> d_opacity_logit;  // n
  std::vector<double> d_color;          // 3n
  // |dL/dmean2d| scaled by (w/2, h/2), for densification statistics.
  std::vector<double> pos_grad_mag;     // n
  std::vector<uint8_t> visible;         // n

  explicit GradientBundle(size_t count = 0) { resize(count); }

  void resize(size_t count) {
    n = count;
    d_center.assign(3 * n, 0.0);
    d_log_scale.assign(3 * n, 0.0);
    d_rotation.assign(4 * n, 0.0);
    d_opacity_logit.assign(n, 0.0);
    d_color.assign(3 * n, 0.0);
    pos_grad_mag.assign(n, 0.0);
    visible.assign(n, 0);
  }

  void add_scaled(const GradientBundle& o, double s);
};

// Alpha-composited forward render over a constant background.
RenderedView render(const GaussianCloud& cloud, const Camera& camera, const Vec3& background,
                    RenderStats* stats = nullptr);

// Reverse-mode gradients for all stored parameters. dl_drgb must be a
// 3-channel buffer of the camera's size; dl_dalpha is a 1-channel buffer or
// empty (treated as zero). Recomputes the forward pass internally; the
// accumulation order is fixed (tile index, then pixel, then splat), so
// results do not depend on threading.
GradientBundle render_backward(const GaussianCloud& cloud, const Camera& camera,
                               const Vec3& background, const ImageBuffer& dl_drgb,
                               const ImageBuffer& dl_dalpha, RenderStats* stats = nullptr);

}  // namespace gslift
