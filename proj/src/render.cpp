#include "gslift/render.hpp"

#include <algorithm>
#include <cmath>

#include "gslift/parallel.hpp"
#include "gslift/project.hpp"
#include "gslift/quaternion.hpp"

namespace gslift {

namespace {

constexpr double kPowerCutoff = -25.0;  // contribution below exp(-25) skipped

// Splat footprint prepared for per-pixel evaluation.
struct FlatSplat {
  double mx, my;          // mean2d
  double a, b, c;         // conic = inverse cov2d, upper triangle
  double opacity;
  double depth;
  double r, g, bcol;      // color clamped on read
  uint32_t prim;
};

struct TileGrid {
  int width = 0, height = 0, tiles_x = 0, tiles_y = 0;
  std::vector<FlatSplat> splats;               // visible, depth-sorted
  std::vector<std::vector<uint32_t>> lists;    // per tile, indices into splats
};

TileGrid build_grid(const GaussianCloud& cloud, const Camera& camera, RenderStats* stats) {
  TileGrid grid;
  grid.width = camera.width;
  grid.height = camera.height;
  grid.tiles_x = (camera.width + kTileSize - 1) / kTileSize;
  grid.tiles_y = (camera.height + kTileSize - 1) / kTileSize;
  grid.lists.resize(static_cast<size_t>(grid.tiles_x) * grid.tiles_y);

  std::vector<ProjectedGaussian> proj = project(cloud, camera, stats);

  std::vector<uint32_t> order;
  order.reserve(proj.size());
  for (uint32_t i = 0; i < proj.size(); ++i)
    if (proj[i].visible) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](uint32_t x, uint32_t y) {
    if (proj[x].depth != proj[y].depth) return proj[x].depth < proj[y].depth;
    return x < y;
  });

  grid.splats.reserve(order.size());
  for (uint32_t id : order) {
    const ProjectedGaussian& p = proj[id];
    double det = p.cov2d.determinant();
    FlatSplat s;
    s.mx = p.mean2d.x();
    s.my = p.mean2d.y();
    s.a = p.cov2d(1, 1) / det;
    s.b = -p.cov2d(0, 1) / det;
    s.c = p.cov2d(0, 0) / det;
    s.opacity = p.opacity;
    s.depth = p.depth;
    const GaussianPrimitive& g = cloud.prims[id];
    s.r = clamp01(g.color[0]);
    s.g = clamp01(g.color[1]);
    s.bcol = clamp01(g.color[2]);
    s.prim = id;

    double mid = 0.5 * (p.cov2d(0, 0) + p.cov2d(1, 1));
    double lam = mid + std::sqrt(std::max(0.0, mid * mid - det));
    // Bin out to the power-cutoff contour: pixels beyond this radius evaluate
    // below kPowerCutoff and are skipped anyway, so tile membership changes
    // cannot change the rendered value (keeps finite differences clean).
    double radius = std::sqrt(-2.0 * kPowerCutoff * lam) + 1.0;

    int tx0 = std::max(0, static_cast<int>(std::floor((s.mx - radius) / kTileSize)));
    int tx1 = std::min(grid.tiles_x - 1, static_cast<int>(std::floor((s.mx + radius) / kTileSize)));
    int ty0 = std::max(0, static_cast<int>(std::floor((s.my - radius) / kTileSize)));
    int ty1 = std::min(grid.tiles_y - 1, static_cast<int>(std::floor((s.my + radius) / kTileSize)));
    // The off-screen cull plus the 1px margin guarantee a nonempty range.
    uint32_t flat_idx = static_cast<uint32_t>(grid.splats.size());
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx)
        grid.lists[static_cast<size_t>(ty) * grid.tiles_x + tx].push_back(flat_idx);
    grid.splats.push_back(s);
  }
  return grid;
}

}  // namespace

void GradientBundle::add_scaled(const GradientBundle& o, double s) {
  if (n != o.n) throw Error(ErrorCode::dimension_mismatch, "gradient bundle size");
  for (size_t i = 0; i < d_center.size(); ++i) d_center[i] += s * o.d_center[i];
  for (size_t i = 0; i < d_log_scale.size(); ++i) d_log_scale[i] += s * o.d_log_scale[i];
  for (size_t i = 0; i < d_rotation.size(); ++i) d_rotation[i] += s * o.d_rotation[i];
  for (size_t i = 0; i < n; ++i) d_opacity_logit[i] += s * o.d_opacity_logit[i];
  for (size_t i = 0; i < d_color.size(); ++i) d_color[i] += s * o.d_color[i];
  for (size_t i = 0; i < n; ++i) {
    pos_grad_mag[i] += o.pos_grad_mag[i];  // magnitudes accumulate unscaled
    visible[i] |= o.visible[i];
  }
}

RenderedView render(const GaussianCloud& cloud, const Camera& camera, const Vec3& background,
                    RenderStats* stats) {
  TileGrid grid = build_grid(cloud, camera, stats);

  RenderedView view;
  view.rgb = ImageBuffer(camera.width, camera.height, 3);
  view.alpha = ImageBuffer(camera.width, camera.height, 1);
  view.depth = ImageBuffer(camera.width, camera.height, 1);

  size_t n_tiles = grid.lists.size();
  parallel_for(n_tiles, [&](size_t tile) {
    int tx = static_cast<int>(tile) % grid.tiles_x;
    int ty = static_cast<int>(tile) / grid.tiles_x;
    int x0 = tx * kTileSize, x1 = std::min(grid.width, x0 + kTileSize);
    int y0 = ty * kTileSize, y1 = std::min(grid.height, y0 + kTileSize);
    const std::vector<uint32_t>& list = grid.lists[tile];

    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        double px = x + 0.5, py = y + 0.5;
        double t = 1.0;
        double cr = 0, cg = 0, cb = 0, dsum = 0, wsum = 0;
        for (uint32_t idx : list) {
          const FlatSplat& s = grid.splats[idx];
          double dx = px - s.mx, dy = py - s.my;
          double power = -0.5 * (s.a * dx * dx + 2.0 * s.b * dx * dy + s.c * dy * dy);
          if (power < kPowerCutoff) continue;
          double alpha = s.opacity * std::exp(power);
          if (alpha > kAlphaClamp) alpha = kAlphaClamp;
          double w = alpha * t;
          cr += s.r * w;
          cg += s.g * w;
          cb += s.bcol * w;
          dsum += s.depth * w;
          wsum += w;
          t *= 1.0 - alpha;
          if (t < kMinTransmittance) break;
        }
        view.rgb.at(x, y, 0) = cr + background.x() * t;
        view.rgb.at(x, y, 1) = cg + background.y() * t;
        view.rgb.at(x, y, 2) = cb + background.z() * t;
        view.alpha.at(x, y, 0) = 1.0 - t;
        view.depth.at(x, y, 0) = wsum > 1e-12 ? dsum / wsum : 0.0;
      }
  });
  return view;
}

GradientBundle render_backward(const GaussianCloud& cloud, const Camera& camera,
                               const Vec3& background, const ImageBuffer& dl_drgb,
                               const ImageBuffer& dl_dalpha, RenderStats* stats) {
  if (dl_drgb.width != camera.width || dl_drgb.height != camera.height || dl_drgb.channels != 3)
    throw Error(ErrorCode::dimension_mismatch, "dl_drgb shape");
  bool has_alpha = dl_dalpha.channels != 0;
  if (has_alpha &&
      (dl_dalpha.width != camera.width || dl_dalpha.height != camera.height || dl_dalpha.channels != 1))
    throw Error(ErrorCode::dimension_mismatch, "dl_dalpha shape");

  TileGrid grid = build_grid(cloud, camera, stats);
  size_t n_tiles = grid.lists.size();

  // Phase A: per-tile partial gradients w.r.t. screen-space quantities,
  // indexed by position in the tile list. Layout per entry:
  // [dmx, dmy, dc00, dc01, dc11, dalpha_eff, dr, dg, db].
  constexpr int kSlots = 9;
  std::vector<std::vector<double>> partials(n_tiles);

  parallel_for(n_tiles, [&](size_t tile) {
    const std::vector<uint32_t>& list = grid.lists[tile];
    if (list.empty()) return;
    std::vector<double>& part = partials[tile];
    part.assign(list.size() * kSlots, 0.0);

    int tx = static_cast<int>(tile) % grid.tiles_x;
    int ty = static_cast<int>(tile) / grid.tiles_x;
    int x0 = tx * kTileSize, x1 = std::min(grid.width, x0 + kTileSize);
    int y0 = ty * kTileSize, y1 = std::min(grid.height, y0 + kTileSize);

    std::vector<double> alphas(list.size());
    std::vector<uint8_t> clamped(list.size());
    std::vector<double> powers(list.size());

    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        double px = x + 0.5, py = y + 0.5;

        // Forward replay for this pixel; keep per-splat alpha to avoid
        // recomputing exp in the second sweep.
        double t = 1.0;
        double totr = 0, totg = 0, totb = 0;
        size_t stop = 0;
        for (size_t k = 0; k < list.size(); ++k) {
          const FlatSplat& s = grid.splats[list[k]];
          double dx = px - s.mx, dy = py - s.my;
          double power = -0.5 * (s.a * dx * dx + 2.0 * s.b * dx * dy + s.c * dy * dy);
          powers[k] = power;
          if (power < kPowerCutoff) {
            alphas[k] = -1.0;  // skipped marker
            ++stop;
            continue;
          }
          double alpha = s.opacity * std::exp(power);
          clamped[k] = alpha > kAlphaClamp;
          if (clamped[k]) alpha = kAlphaClamp;
          alphas[k] = alpha;
          double w = alpha * t;
          totr += s.r * w;
          totg += s.g * w;
          totb += s.bcol * w;
          t *= 1.0 - alpha;
          ++stop;
          if (t < kMinTransmittance) break;
        }
        double t_final = t;

        double upr = dl_drgb.at(x, y, 0);
        double upg = dl_drgb.at(x, y, 1);
        double upb = dl_drgb.at(x, y, 2);
        double upa = has_alpha ? dl_dalpha.at(x, y, 0) : 0.0;
        if (upr == 0 && upg == 0 && upb == 0 && upa == 0) continue;

        // dL/dT_final collects the background and alpha output paths.
        double dl_dtfin = upr * background.x() + upg * background.y() + upb * background.z() - upa;

        // Second sweep: prefix transmittance and suffix color sums.
        t = 1.0;
        double prefr = 0, prefg = 0, prefb = 0;
        for (size_t k = 0; k < stop; ++k) {
          if (alphas[k] < 0.0) continue;
          const FlatSplat& s = grid.splats[list[k]];
          double alpha = alphas[k];
          double w = alpha * t;
          prefr += s.r * w;
          prefg += s.g * w;
          prefb += s.bcol * w;
          double sufr = totr - prefr;  // contributions of splats behind k
          double sufg = totg - prefg;
          double sufb = totb - prefb;
          double om = 1.0 - alpha;  // >= 1 - kAlphaClamp

          double dl_dalpha_eff =
              upr * (s.r * t - sufr / om) + upg * (s.g * t - sufg / om) +
              upb * (s.bcol * t - sufb / om) - dl_dtfin * t_final / om;

          double* slot = &part[k * kSlots];
          slot[6] += upr * w;
          slot[7] += upg * w;
          slot[8] += upb * w;

          if (!clamped[k]) {
            // alpha_eff = opacity * exp(power)
            double dl_dpower = dl_dalpha_eff * alpha;
            slot[5] += dl_dalpha_eff * (alpha / s.opacity);  // w.r.t. opacity
            double dx = px - s.mx, dy = py - s.my;
            double gx = s.a * dx + s.b * dy;  // d(-power)/ddx
            double gy = s.b * dx + s.c * dy;
            // power = -0.5 d^T A d, d = p - mean
            slot[0] += dl_dpower * gx;
            slot[1] += dl_dpower * gy;
            // dL/dA = -0.5 * dl_dpower * d d^T ; dL/dcov = -A dL/dA A
            // evaluates to +0.5 * dl_dpower * (Ad)(Ad)^T.
            slot[2] += 0.5 * dl_dpower * gx * gx;
            slot[3] += dl_dpower * gx * gy;  // off-diagonal counted once, both sides
            slot[4] += 0.5 * dl_dpower * gy * gy;
          }
          t *= om;
          if (t < kMinTransmittance) break;
        }
      }
  });

  // Phase B: ordered reduction into per-primitive screen-space gradients.
  size_t n_flat = grid.splats.size();
  std::vector<double> screen(n_flat * kSlots, 0.0);
  for (size_t tile = 0; tile < n_tiles; ++tile) {
    const std::vector<uint32_t>& list = grid.lists[tile];
    const std::vector<double>& part = partials[tile];
    if (part.empty()) continue;
    for (size_t k = 0; k < list.size(); ++k) {
      double* dst = &screen[static_cast<size_t>(list[k]) * kSlots];
      const double* src = &part[k * kSlots];
      for (int s = 0; s < kSlots; ++s) dst[s] += src[s];
    }
  }

  // Phase C: chain through projection and reparameterizations, independent
  // per primitive.
  GradientBundle bundle(cloud.size());
  Mat3 w2c = camera.world_to_cam();
  double f = camera.focal_px;
  double half_w = camera.width * 0.5, half_h = camera.height * 0.5;

  parallel_for(n_flat, [&](size_t fi) {
    const FlatSplat& s = grid.splats[fi];
    uint32_t i = s.prim;
    bundle.visible[i] = 1;
    const double* g2 = &screen[fi * kSlots];

    Vec2 d_mean(g2[0], g2[1]);
    Mat2 d_cov;
    d_cov << g2[2], 0.5 * g2[3], 0.5 * g2[3], g2[4];
    double d_opacity = g2[5];
    Vec3 d_col(g2[6], g2[7], g2[8]);

    const GaussianPrimitive& g = cloud.prims[i];
    Vec3 t = w2c * (g.center_v() - camera.position);
    double inv_z = 1.0 / t.z();

    Mat23 j;
    j << f * inv_z, 0, -f * t.x() * inv_z * inv_z,
        0, f * inv_z, -f * t.y() * inv_z * inv_z;
    Mat23 m = j * w2c;

    Vec4 q = g.rotation_v();
    double qn = q.norm();
    Vec4 q_hat = qn > 1e-12 ? Vec4(q / qn) : Vec4(1, 0, 0, 0);
    Mat3 rot = quaternion_to_matrix(q, nullptr);
    Vec3 sc = g.log_scale_v().array().exp();
    Mat3 n_mat = rot * sc.asDiagonal();
    Mat3 sigma3 = n_mat * n_mat.transpose();

    // cov2d = M Sigma M^T + lowpass; d_cov is symmetric.
    Mat3 d_sigma3 = m.transpose() * d_cov * m;
    Mat23 d_m = 2.0 * d_cov * m * sigma3;
    Mat23 d_j = d_m * w2c.transpose();

    // Mean path: dmean/dt = J.
    Vec3 d_t = j.transpose() * d_mean;
    // J path.
    double fz2 = f * inv_z * inv_z;
    double fz3 = 2.0 * f * inv_z * inv_z * inv_z;
    d_t.x() += d_j(0, 2) * -fz2;
    d_t.y() += d_j(1, 2) * -fz2;
    d_t.z() += d_j(0, 0) * -fz2 + d_j(1, 1) * -fz2 + d_j(0, 2) * fz3 * t.x() +
               d_j(1, 2) * fz3 * t.y();

    Vec3 d_center = w2c.transpose() * d_t;

    // Sigma = N N^T.
    Mat3 d_n = 2.0 * d_sigma3 * n_mat;
    Vec3 d_log_scale;
    for (int k = 0; k < 3; ++k)
      d_log_scale[k] = rot.col(k).dot(d_n.col(k)) * sc[k];
    Mat3 d_rot = d_n * sc.asDiagonal();

    Mat3 jq[4];
    quaternion_matrix_jacobian(q_hat, jq);
    Vec4 d_qhat;
    for (int k = 0; k < 4; ++k) d_qhat[k] = (d_rot.array() * jq[k].array()).sum();
    Vec4 d_q = Vec4::Zero();
    if (qn > 1e-12) d_q = (d_qhat - q_hat * q_hat.dot(d_qhat)) / qn;

    double op = s.opacity;

    for (int k = 0; k < 3; ++k) {
      bundle.d_center[3 * i + k] = d_center[k];
      bundle.d_log_scale[3 * i + k] = d_log_scale[k];
      double stored = g.color[k];
      bundle.d_color[3 * i + k] = (stored >= 0.f && stored <= 1.f) ? d_col[k] : 0.0;
    }
    for (int k = 0; k < 4; ++k) bundle.d_rotation[4 * i + k] = d_q[k];
    bundle.d_opacity_logit[i] = d_opacity * op * (1.0 - op);
    bundle.pos_grad_mag[i] =
        std::sqrt(d_mean.x() * half_w * d_mean.x() * half_w + d_mean.y() * half_h * d_mean.y() * half_h);
  });

  return bundle;
}

}  // namespace gslift
