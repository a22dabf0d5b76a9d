#include "gslift/densify.hpp"

#include <algorithm>
#include <cmath>

#include "gslift/quaternion.hpp"

namespace gslift {

double cloud_extent(const GaussianCloud& cloud) {
  if (cloud.prims.empty()) return 0.0;
  Vec3 lo = cloud.prims[0].center_v();
  Vec3 hi = lo;
  for (const GaussianPrimitive& p : cloud.prims) {
    lo = lo.cwiseMin(p.center_v());
    hi = hi.cwiseMax(p.center_v());
  }
  return 0.5 * (hi - lo).norm();
}

DensifyReport densify_and_prune(GaussianCloud& cloud, const DensifyParams& params) {
  cloud.ensure_stats();
  DensifyReport rep;
  rep.before = cloud.size();

  double split_above = params.split_scale_fraction * params.scene_extent;
  std::vector<GaussianPrimitive> next;
  next.reserve(cloud.size() + cloud.size() / 4);

  for (size_t i = 0; i < cloud.prims.size(); ++i) {
    const GaussianPrimitive& p = cloud.prims[i];
    uint32_t count = cloud.grad_count[i];
    double mean_grad = count ? cloud.pos_grad_accum[i] / count : 0.0;
    if (!(mean_grad > params.grad_threshold)) {
      next.push_back(p);
      continue;
    }

    Vec3 ls = p.log_scale_v();
    int axis = 0;
    if (ls[1] > ls[axis]) axis = 1;
    if (ls[2] > ls[axis]) axis = 2;
    double sigma_max = std::exp(ls[axis]);

    if (sigma_max > split_above) {
      ++rep.splits;
      Mat3 r = quaternion_to_matrix(p.rotation_v());
      Vec3 dir = r.col(axis);
      Vec3 c = p.center_v();
      for (int child = 0; child < 2; ++child) {
        GaussianPrimitive q = p;
        Vec3 cc = c + (child == 0 ? 0.5 : -0.5) * sigma_max * dir;
        for (int d = 0; d < 3; ++d) {
          q.center[d] = static_cast<float>(cc[d]);
          q.log_scale[d] = static_cast<float>(ls[d] - std::log(1.6));
        }
        next.push_back(q);
      }
    } else {
      ++rep.clones;
      next.push_back(p);
      GaussianPrimitive q = p;
      Vec3 g(cloud.grad_dir_accum[3 * i], cloud.grad_dir_accum[3 * i + 1],
             cloud.grad_dir_accum[3 * i + 2]);
      double gn = g.norm();
      if (gn > 1e-12) {
        // Descend: the copy moves against the accumulated positional gradient.
        Vec3 cc = p.center_v() - (0.5 * sigma_max / gn) * g;
        for (int d = 0; d < 3; ++d) q.center[d] = static_cast<float>(cc[d]);
      }
      next.push_back(q);
    }
  }

  std::vector<GaussianPrimitive> kept;
  kept.reserve(next.size());
  for (const GaussianPrimitive& p : next) {
    if (p.opacity() < params.prune_opacity) {
      ++rep.pruned;
    } else {
      kept.push_back(p);
    }
  }

  cloud.prims = std::move(kept);
  cloud.reset_stats();
  rep.after = cloud.size();
  return rep;
}

}  // namespace gslift
