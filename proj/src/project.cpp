#include "gslift/project.hpp"

#include <cmath>

#include "gslift/quaternion.hpp"

namespace gslift {

std::vector<ProjectedGaussian> project(const GaussianCloud& cloud, const Camera& camera,
                                       RenderStats* stats) {
  camera.validate();
  Mat3 w2c = camera.world_to_cam();
  double f = camera.focal_px;
  double cx = camera.width * 0.5;
  double cy = camera.height * 0.5;

  std::vector<ProjectedGaussian> out(cloud.size());
  size_t near_culled = 0, off_culled = 0, singular = 0, zero_quat = 0, visible = 0;

  for (size_t i = 0; i < cloud.size(); ++i) {
    const GaussianPrimitive& g = cloud.prims[i];
    ProjectedGaussian& p = out[i];

    Vec3 t = w2c * (g.center_v() - camera.position);
    if (!(t.z() > kNearPlane)) {
      ++near_culled;
      continue;
    }

    double inv_z = 1.0 / t.z();
    p.mean2d = Vec2(f * t.x() * inv_z + cx, f * t.y() * inv_z + cy);
    p.depth = t.z();
    p.opacity = sigmoid(static_cast<double>(g.opacity_logit));

    Mat3 sigma = covariance_3d(g.log_scale_v(), g.rotation_v(), &zero_quat);
    Mat23 j;
    j << f * inv_z, 0, -f * t.x() * inv_z * inv_z,
        0, f * inv_z, -f * t.y() * inv_z * inv_z;
    Mat23 m = j * w2c;
    p.cov2d = m * sigma * m.transpose() + Mat2::Identity() * kLowPass;

    double det = p.cov2d.determinant();
    if (!(det > kSingularDet) || !std::isfinite(det)) {
      ++singular;
      continue;
    }

    // Conservative cull radius: 3 sigma of the major axis.
    double mid = 0.5 * (p.cov2d(0, 0) + p.cov2d(1, 1));
    double lam = mid + std::sqrt(std::max(0.0, mid * mid - det));
    double r = kFootprintSigma * std::sqrt(lam);
    if (p.mean2d.x() + r < 0 || p.mean2d.x() - r > camera.width ||
        p.mean2d.y() + r < 0 || p.mean2d.y() - r > camera.height) {
      ++off_culled;
      continue;
    }

    p.visible = true;
    ++visible;
  }

  if (stats) {
    stats->visible += visible;
    stats->culled_near += near_culled;
    stats->culled_offscreen += off_culled;
    stats->skipped_singular += singular;
    stats->zero_quaternion += zero_quat;
  }
  return out;
}

}  // namespace gslift
