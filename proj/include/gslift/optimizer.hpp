#pragma once

#include <vector>

#include "gslift/render.hpp"
#include "gslift/types.hpp"

namespace gslift {

struct OptimizerConfig {
  double lr_position = 0.001;
  double lr_color = 0.01;
  double lr_opacity = 0.05;
  double lr_scale = 0.005;
  double lr_rotation = 0.005;
  double lr_floor = 2e-5;  // terminal rate of the log-linear decay
  double clip_norm = 1.0;  // per-primitive per-group gradient norm cap
  bool adam = false;       // moment-based variant, off by default
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Descent with per-group rates decayed log-linearly to the floor. After every
// step quaternions are renormalized and colors clamped to [0,1].
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  void step(GaussianCloud& cloud, const GradientBundle& grads, int step_index, int total_steps);

  // Drop accumulated moments; call after events that renumber primitives.
  void reset_state();

  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  int adam_steps_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace gslift
