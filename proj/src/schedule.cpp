#include "gslift/schedule.hpp"

#include <cmath>

#include "gslift/error.hpp"

namespace gslift {

NoiseSchedule::NoiseSchedule(int total, double bs, double be)
    : T(total), beta_start(bs), beta_end(be) {
  if (T < 1) throw Error(ErrorCode::bad_value, "schedule needs T >= 1");
  if (!(bs >= 0) || !(be >= bs) || be >= 1.0)
    throw Error(ErrorCode::bad_value, "schedule betas must satisfy 0 <= start <= end < 1");
  alpha_bar.resize(static_cast<size_t>(T) + 1);
  alpha_bar[0] = 1.0;
  for (int t = 1; t <= T; ++t) {
    double beta = T == 1 ? bs : bs + (be - bs) * static_cast<double>(t - 1) / (T - 1);
    alpha_bar[t] = alpha_bar[t - 1] * (1.0 - beta);
  }
}

double NoiseSchedule::alpha_bar_at(int t) const {
  if (t < 0 || t > T) throw Error(ErrorCode::out_of_range, "timestep outside schedule");
  return alpha_bar[static_cast<size_t>(t)];
}

int NoiseSchedule::t_min() const { return std::max(1, (T * 2) / 100); }

int NoiseSchedule::t_max() const { return (T * 98) / 100; }

ImageBuffer forward_diffuse(const ImageBuffer& x0, int t, const ImageBuffer& eps,
                            const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.T) throw Error(ErrorCode::out_of_range, "timestep outside schedule");
  require_same_shape(x0, eps, "forward_diffuse");
  double ab = schedule.alpha_bar_at(t);
  double sa = std::sqrt(ab);
  double sb = std::sqrt(1.0 - ab);
  ImageBuffer out(x0.width, x0.height, x0.channels);
  for (size_t i = 0; i < x0.data.size(); ++i) out.data[i] = sa * x0.data[i] + sb * eps.data[i];
  return out;
}

}  // namespace gslift
