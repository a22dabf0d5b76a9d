#include "gslift/optimizer.hpp"

#include <cmath>

namespace gslift {

namespace {

// Log-linear interpolation from lr to the floor over the run. Rates below
// the floor are left alone rather than grown toward it.
double decayed_rate(double lr, double floor, int step_index, int total_steps) {
  if (lr <= floor || total_steps <= 1) return lr;
  double t = static_cast<double>(step_index) / static_cast<double>(total_steps - 1);
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return lr * std::pow(floor / lr, t);
}

void clip_group(double* g, int dims, double cap) {
  if (!(cap > 0.0)) return;
  double sq = 0.0;
  for (int d = 0; d < dims; ++d) sq += g[d] * g[d];
  double norm = std::sqrt(sq);
  if (norm > cap) {
    double s = cap / norm;
    for (int d = 0; d < dims; ++d) g[d] *= s;
  }
}

}  // namespace

void Optimizer::reset_state() {
  adam_steps_ = 0;
  m_.clear();
  v_.clear();
}

void Optimizer::step(GaussianCloud& cloud, const GradientBundle& grads, int step_index,
                     int total_steps) {
  size_t n = cloud.size();
  if (grads.n != n) throw Error(ErrorCode::dimension_mismatch, "gradient bundle size");
  constexpr int kParams = 14;  // 3 center + 3 scale + 4 rotation + 1 opacity + 3 color

  if (cfg_.adam && m_.size() != n * kParams) {
    m_.assign(n * kParams, 0.0);
    v_.assign(n * kParams, 0.0);
    adam_steps_ = 0;
  }
  if (cfg_.adam) ++adam_steps_;
  double bc1 = cfg_.adam ? 1.0 - std::pow(cfg_.adam_beta1, adam_steps_) : 1.0;
  double bc2 = cfg_.adam ? 1.0 - std::pow(cfg_.adam_beta2, adam_steps_) : 1.0;

  struct Group {
    const double* src;
    int dims;
    double lr;
    int offset;  // into the per-primitive Adam state block
  };
  const Group groups[] = {
      {grads.d_center.data(), 3, cfg_.lr_position, 0},
      {grads.d_log_scale.data(), 3, cfg_.lr_scale, 3},
      {grads.d_rotation.data(), 4, cfg_.lr_rotation, 6},
      {grads.d_opacity_logit.data(), 1, cfg_.lr_opacity, 10},
      {grads.d_color.data(), 3, cfg_.lr_color, 11},
  };

  for (size_t i = 0; i < n; ++i) {
    GaussianPrimitive& p = cloud.prims[i];
    float* fields[] = {p.center.data(), p.log_scale.data(), p.rotation.data(), &p.opacity_logit,
                       p.color.data()};
    for (int gi = 0; gi < 5; ++gi) {
      const Group& gr = groups[gi];
      double rate = decayed_rate(gr.lr, cfg_.lr_floor, step_index, total_steps);
      double g[4];
      for (int d = 0; d < gr.dims; ++d) g[d] = gr.src[i * gr.dims + d];
      clip_group(g, gr.dims, cfg_.clip_norm);
      for (int d = 0; d < gr.dims; ++d) {
        double upd = g[d];
        if (cfg_.adam) {
          size_t s = i * kParams + gr.offset + d;
          m_[s] = cfg_.adam_beta1 * m_[s] + (1.0 - cfg_.adam_beta1) * g[d];
          v_[s] = cfg_.adam_beta2 * v_[s] + (1.0 - cfg_.adam_beta2) * g[d] * g[d];
          upd = (m_[s] / bc1) / (std::sqrt(v_[s] / bc2) + cfg_.adam_eps);
        }
        fields[gi][d] = static_cast<float>(static_cast<double>(fields[gi][d]) - rate * upd);
      }
    }

    // Re-project onto the valid parameter set.
    Vec4 q = p.rotation_v();
    double qn = q.norm();
    if (qn > 1e-12) {
      q /= qn;
    } else {
      q = Vec4(1, 0, 0, 0);
    }
    for (int d = 0; d < 4; ++d) p.rotation[d] = static_cast<float>(q[d]);
    for (int d = 0; d < 3; ++d) p.color[d] = static_cast<float>(clamp01(p.color[d]));
  }
}

}  // namespace gslift
