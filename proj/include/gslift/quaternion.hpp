#pragma once

#include "gslift/types.hpp"

namespace gslift {

// Rotation matrix from a quaternion (w,x,y,z), normalizing internally.
// Zero-norm input falls back to identity; the caller may count it.
inline Mat3 quaternion_to_matrix(const Vec4& q, size_t* zero_count = nullptr) {
  double n = q.norm();
  if (!(n > 1e-12)) {
    if (zero_count) ++*zero_count;
    return Mat3::Identity();
  }
  double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

// dR/dq_hat for the normalized quaternion, one 3x3 slab per component.
inline void quaternion_matrix_jacobian(const Vec4& q_hat, Mat3 d[4]) {
  double w = q_hat[0], x = q_hat[1], y = q_hat[2], z = q_hat[3];
  d[0] << 0, -2 * z, 2 * y,
      2 * z, 0, -2 * x,
      -2 * y, 2 * x, 0;
  d[1] << 0, 2 * y, 2 * z,
      2 * y, -4 * x, -2 * w,
      2 * z, 2 * w, -4 * x;
  d[2] << -4 * y, 2 * x, 2 * w,
      2 * x, 0, 2 * z,
      -2 * w, 2 * z, -4 * y;
  d[3] << -4 * z, -2 * w, 2 * x,
      2 * w, -4 * z, 2 * y,
      2 * x, 2 * y, 0;
}

// Sigma = R diag(exp(ls))^2 R^T. Symmetric PSD by construction.
inline Mat3 covariance_3d(const Vec3& log_scale, const Vec4& rotation,
                          size_t* zero_count = nullptr) {
  Mat3 r = quaternion_to_matrix(rotation, zero_count);
  Vec3 s = log_scale.array().exp();
  Mat3 rs = r * s.asDiagonal();
  return rs * rs.transpose();
}

}  // namespace gslift
