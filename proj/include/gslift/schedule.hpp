#pragma once

#include <vector>

#include "gslift/types.hpp"

namespace gslift {

// Linear-beta forward diffusion schedule. alpha_bar[0] = 1 (empty product);
// alpha_bar[t] strictly decreasing for t = 1..T.
struct NoiseSchedule {
  int T = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::vector<double> alpha_bar;

  explicit NoiseSchedule(int total = 1000, double bs = 1e-4, double be = 0.02);

  double alpha_bar_at(int t) const;

  // Timestep sampling window: [0.02 T, 0.98 T].
  int t_min() const;
  int t_max() const;
};

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps, t in [1, T].
ImageBuffer forward_diffuse(const ImageBuffer& x0, int t, const ImageBuffer& eps,
                            const NoiseSchedule& schedule);

}  // namespace gslift
