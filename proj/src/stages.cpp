#include "gslift/stages.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gslift/losses.hpp"
#include "gslift/render.hpp"
#include "gslift/rng.hpp"

namespace gslift {

void StageConfig::validate() const {
  if (iters < 0) throw Error(ErrorCode::bad_value, "iters must be >= 0");
  if (batch_views < 1) throw Error(ErrorCode::bad_value, "batch_views must be >= 1");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(ErrorCode::bad_value, std::string(name) + " must be > 0");
  };
  positive(lr_position, "lr_position");
  positive(lr_color, "lr_color");
  positive(lr_opacity, "lr_opacity");
  positive(lr_scale, "lr_scale");
  positive(lr_rotation, "lr_rotation");
  positive(lr_floor, "lr_floor");
  if (densify_interval < 1) throw Error(ErrorCode::bad_value, "densify_interval must be >= 1");
  if (checkpoint_interval < 1)
    throw Error(ErrorCode::bad_value, "checkpoint_interval must be >= 1");
  if (gamma_period < 1) throw Error(ErrorCode::bad_value, "gamma_period must be >= 1");
  if (beta < 0.0) throw Error(ErrorCode::bad_value, "beta must be >= 0");
  if (ref_view_weight < 0.0) throw Error(ErrorCode::bad_value, "ref_view_weight must be >= 0");
}

OptimizerConfig StageConfig::optimizer_config() const {
  OptimizerConfig oc;
  oc.lr_position = lr_position;
  oc.lr_color = lr_color;
  oc.lr_opacity = lr_opacity;
  oc.lr_scale = lr_scale;
  oc.lr_rotation = lr_rotation;
  oc.lr_floor = lr_floor;
  oc.clip_norm = clip_norm;
  oc.adam = adam;
  return oc;
}

double gamma_at(int step, const StageConfig& cfg) {
  if (step < 0) throw Error(ErrorCode::out_of_range, "gamma step must be >= 0");
  double g = cfg.gamma_start + cfg.gamma_increment * (step / cfg.gamma_period);
  return g < 1.0 ? g : 1.0;
}

GaussianCloud init_cloud(size_t n, double box_half_extent, uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::out_of_range, "init_cloud needs n >= 1");
  if (!(box_half_extent > 0.0)) throw Error(ErrorCode::out_of_range, "box_half_extent");
  Rng rng(hash_combine(seed, 0x1c1fu));
  GaussianCloud cloud;
  cloud.prims.resize(n);
  for (GaussianPrimitive& p : cloud.prims) {
    for (int d = 0; d < 3; ++d)
      p.center[d] = static_cast<float>(rng.uniform(-box_half_extent, box_half_extent));
    p.opacity_logit = static_cast<float>(logit(0.1));
    for (int d = 0; d < 3; ++d) p.color[d] = 0.5f;
  }

  // Mean nearest-neighbor distance sets the initial footprint so the cloud
  // roughly tiles the box. Exact O(n^2) scan; n is a few thousand.
  double nn_sum = 0.0;
  if (n > 1) {
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      Vec3 ci = cloud.prims[i].center_v();
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double d2 = (cloud.prims[j].center_v() - ci).squaredNorm();
        if (d2 < best) best = d2;
      }
      nn_sum += std::sqrt(best);
    }
  }
  double nn_mean = n > 1 ? nn_sum / n : box_half_extent;
  float ls = static_cast<float>(std::log(std::max(nn_mean, 1e-6)));
  for (GaussianPrimitive& p : cloud.prims)
    for (int d = 0; d < 3; ++d) p.log_scale[d] = ls;
  cloud.reset_stats();
  return cloud;
}

Camera hemisphere_camera(double azimuth, double elevation, double radius, const Vec3& look_at,
                         int width, int height, double focal_px) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.focal_px = focal_px;
  cam.look_at = look_at;
  cam.position = look_at + radius * Vec3(std::sin(azimuth) * std::cos(elevation),
                                         std::sin(elevation),
                                         std::cos(azimuth) * std::cos(elevation));
  cam.up = Vec3(0, 1, 0);
  cam.azimuth = azimuth;
  cam.elevation = elevation;
  cam.radius = radius;
  return cam;
}

std::string report_to_text(const StageReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "stage=" << report.stage << "\n";
  os << "checkpoints=" << report.checkpoints.size() << "\n";
  for (size_t i = 0; i < report.checkpoints.size(); ++i) {
    const Checkpoint& c = report.checkpoints[i];
    os << "checkpoint_" << i << ".step=" << c.step << "\n";
    for (const auto& kv : c.metrics)
      os << "checkpoint_" << i << "." << kv.first << "=" << kv.second << "\n";
  }
  os << "densify_events=" << report.densify_events.size() << "\n";
  for (size_t i = 0; i < report.densify_events.size(); ++i) {
    const DensifyEvent& e = report.densify_events[i];
    os << "densify_" << i << ".step=" << e.step << "\n";
    os << "densify_" << i << ".before=" << e.report.before << "\n";
    os << "densify_" << i << ".splits=" << e.report.splits << "\n";
    os << "densify_" << i << ".clones=" << e.report.clones << "\n";
    os << "densify_" << i << ".pruned=" << e.report.pruned << "\n";
    os << "densify_" << i << ".after=" << e.report.after << "\n";
  }
  os << "wall_seconds=" << report.wall_seconds << "\n";
  return os.str();
}

namespace {

// Elements are +-1 where a and b differ (sign of a-b), 0 where equal:
// the L1 gradient without the mean normalization.
ImageBuffer sign_image(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "sign image inputs");
  ImageBuffer out(a.width, a.height, a.channels);
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    out.data[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

ImageBuffer normal_image(int w, int h, int c, Rng& rng) {
  ImageBuffer out(w, h, c);
  for (double& v : out.data) v = rng.normal();
  return out;
}

// Area-uniform elevation on [0, cap], uniform azimuth. Keeps poses stateless
// per (seed, step, view) so runs are reproducible under any thread count.
Camera sample_pose(Rng& rng, const Camera& ref, double elevation_cap) {
  double radius = (ref.position - ref.look_at).norm();
  double azimuth = rng.uniform(-M_PI, M_PI);
  double elevation = std::asin(rng.uniform() * std::sin(elevation_cap));
  return hemisphere_camera(azimuth, elevation, radius, ref.look_at, ref.width, ref.height,
                           ref.focal_px);
}

// Reference supervision upstream: mean-convention reference_loss partials
// rescaled to per-element sign magnitude so the term competes with the
// per-pixel distillation gradients under the shared clip.
struct RefTerm {
  double loss = 0.0;
  ImageBuffer d_rgb;
  ImageBuffer d_alpha;
};

RefTerm reference_term(const RenderedView& view, const StageInputs& in, double weight) {
  ReferenceLossResult ref = reference_loss(view, in.reference_image, in.reference_mask);
  RefTerm term;
  term.loss = ref.loss;
  term.d_rgb = std::move(ref.d_rgb);
  term.d_alpha = std::move(ref.d_alpha);
  double n_rgb = static_cast<double>(term.d_rgb.count());
  double n_alpha = static_cast<double>(term.d_alpha.count());
  for (double& v : term.d_rgb.data) v *= weight * n_rgb;
  for (double& v : term.d_alpha.data) v *= weight * n_alpha;
  return term;
}

struct HeldOutMetrics {
  double psnr_db = 0.0;
  double l1_err = 0.0;
  double perceptual_err = 0.0;
};

// Mean masked metrics over the held-out views; views whose mask is empty
// are skipped.
HeldOutMetrics heldout_metrics(const GaussianCloud& cloud, const HeldOutSet& held,
                               const Vec3& background) {
  HeldOutMetrics m;
  int used = 0;
  for (size_t i = 0; i < held.cameras.size(); ++i) {
    RenderedView v = render(cloud, held.cameras[i], background);
    const ImageBuffer* mask = i < held.mask.size() ? &held.mask[i] : nullptr;
    try {
      double l = l1(v.rgb, held.rgb[i], mask);
      m.psnr_db += psnr(v.rgb, held.rgb[i], mask);
      m.l1_err += l;
      m.perceptual_err += mask ? masked_perceptual(v.rgb, held.rgb[i], *mask)
                               : perceptual(v.rgb, held.rgb[i]).loss;
      ++used;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::empty_mask) throw;
    }
  }
  if (used > 0) {
    m.psnr_db /= used;
    m.l1_err /= used;
    m.perceptual_err /= used;
  }
  return m;
}

// Fold one rendered view's gradients into the per-step bundle and the
// cloud's densification statistics (per-view, mean-convention magnitude).
void accumulate_view(GaussianCloud& cloud, const GradientBundle& vb, double batch_scale,
                     size_t pixels, GradientBundle& total) {
  total.add_scaled(vb, batch_scale);
  for (size_t i = 0; i < vb.n; ++i) {
    if (!vb.visible[i]) continue;
    cloud.pos_grad_accum[i] += vb.pos_grad_mag[i] / static_cast<double>(pixels);
    cloud.grad_count[i] += 1;
    for (int d = 0; d < 3; ++d) cloud.grad_dir_accum[3 * i + d] += vb.d_center[3 * i + d];
  }
}

struct StageDriver {
  const StageInputs& in;
  const StageConfig& cfg;
  uint64_t seed;
  std::string name;

  GaussianCloud cloud;
  Optimizer opt;
  StageResult result;
  std::chrono::steady_clock::time_point t0;

  StageDriver(const GaussianCloud& start, const StageInputs& inputs, const StageConfig& config,
              uint64_t s, std::string stage_name)
      : in(inputs),
        cfg(config),
        seed(s),
        name(std::move(stage_name)),
        cloud(start),
        opt(config.optimizer_config()),
        t0(std::chrono::steady_clock::now()) {
    cfg.validate();
    in.reference_camera.validate();
    require_same_shape(in.reference_image,
                       ImageBuffer(in.reference_camera.width, in.reference_camera.height, 3),
                       "reference image vs camera");
    if (in.reference_mask.width != in.reference_camera.width ||
        in.reference_mask.height != in.reference_camera.height || in.reference_mask.channels != 1)
      throw Error(ErrorCode::dimension_mismatch, "reference mask vs camera");
    cloud.ensure_stats();
    result.report.stage = name;
  }

  void checkpoint(int step, std::vector<std::pair<std::string, double>> metrics) {
    metrics.emplace_back("count", static_cast<double>(cloud.size()));
    if (in.held_out) {
      HeldOutMetrics hm = heldout_metrics(cloud, *in.held_out, in.background);
      metrics.emplace_back("psnr_heldout", hm.psnr_db);
      metrics.emplace_back("l1_heldout", hm.l1_err);
      metrics.emplace_back("perceptual_heldout", hm.perceptual_err);
    }
    result.report.checkpoints.push_back({step, std::move(metrics)});
  }

  void maybe_densify(int step) {
    if ((step + 1) % cfg.densify_interval != 0) return;
    // Adaptive density runs only through the first half of the stage; later
    // events would leave the new primitives no time to converge and poison
    // the stage output.
    if (step + 1 > cfg.iters / 2) return;
    DensifyParams dp;
    dp.grad_threshold = cfg.densify_grad_threshold;
    dp.prune_opacity = cfg.prune_opacity_threshold;
    dp.scene_extent = cloud_extent(cloud);
    DensifyReport rep = densify_and_prune(cloud, dp);
    result.report.densify_events.push_back({step + 1, rep});
    if (rep.after != rep.before) opt.reset_state();
  }

  void finish(bool completed, const std::string& error = {}) {
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.cloud = std::move(cloud);
    result.completed = completed;
    result.error = error;
  }
};

}  // namespace

StageResult coarse_stage(const GaussianCloud& init, const StageInputs& in, const StageConfig& cfg,
                         const SynthesizerOracle& synth, const NoiseSchedule& schedule,
                         uint64_t seed) {
  StageDriver d(init, in, cfg, seed, "coarse");
  size_t pixels = static_cast<size_t>(in.reference_camera.width) * in.reference_camera.height;

  for (int step = 0; step < cfg.iters; ++step) {
    Rng step_rng(hash_combine(seed, static_cast<uint64_t>(step)));
    GradientBundle total(d.cloud.size());
    double batch_scale = 1.0 / cfg.batch_views;

    try {
      for (int k = 0; k < cfg.batch_views; ++k) {
        Rng vr = step_rng.fork(static_cast<uint64_t>(k));
        Camera cam = sample_pose(vr, in.reference_camera, cfg.elevation_max);
        RelativePose rel = RelativePose::between(in.reference_camera, cam);
        RenderedView view = render(d.cloud, cam, in.background);
        int t = static_cast<int>(
            vr.uniform_int(schedule.t_min(), schedule.t_max()));
        ImageBuffer eps = normal_image(cam.width, cam.height, 3, vr);
        ImageBuffer up = sds_grad(view, in.reference_image, rel, t, eps, synth, schedule);
        GradientBundle vb =
            render_backward(d.cloud, cam, in.background, up, ImageBuffer(), nullptr);
        accumulate_view(d.cloud, vb, batch_scale, pixels, total);
      }
    } catch (const Error& e) {
      d.checkpoint(step, {{"aborted", 1.0}});
      d.finish(false, e.what());
      return std::move(d.result);
    }

    RenderedView ref_view = render(d.cloud, in.reference_camera, in.background);
    RefTerm ref = reference_term(ref_view, in, cfg.ref_view_weight);
    GradientBundle rb =
        render_backward(d.cloud, in.reference_camera, in.background, ref.d_rgb, ref.d_alpha);
    accumulate_view(d.cloud, rb, 1.0, pixels, total);

    d.opt.step(d.cloud, total, step, cfg.iters);
    d.maybe_densify(step);

    if ((step + 1) % cfg.checkpoint_interval == 0 || step + 1 == cfg.iters)
      d.checkpoint(step + 1, {{"ref_loss", ref.loss}});
  }
  d.finish(true);
  return std::move(d.result);
}

StageResult viewwise_stage(const GaussianCloud& theta0, const StageInputs& in,
                           const StageConfig& cfg, const SynthesizerOracle& synth,
                           uint64_t seed) {
  StageDriver d(theta0, in, cfg, seed, "viewwise");
  size_t pixels = static_cast<size_t>(in.reference_camera.width) * in.reference_camera.height;

  for (int step = 0; step < cfg.iters; ++step) {
    Rng step_rng(hash_combine(seed, static_cast<uint64_t>(step)));
    GradientBundle total(d.cloud.size());
    double batch_scale = 1.0 / cfg.batch_views;
    double gamma = gamma_at(step, cfg);
    double l1_term = 0.0, perc_term = 0.0;

    try {
      for (int k = 0; k < cfg.batch_views; ++k) {
        Rng vr = step_rng.fork(static_cast<uint64_t>(k));
        Camera cam = sample_pose(vr, in.reference_camera, cfg.elevation_max);
        RelativePose rel = RelativePose::between(in.reference_camera, cam);
        RenderedView view = render(d.cloud, cam, in.background);

        // Refined target: prior applied to the gamma-blend of the render
        // with fresh standard noise.
        ImageBuffer blend(cam.width, cam.height, 3);
        for (size_t i = 0; i < blend.data.size(); ++i)
          blend.data[i] = gamma * view.rgb.data[i] + (1.0 - gamma) * vr.normal();
        ImageBuffer refined = synth.synthesize(blend, gamma, in.reference_image, rel);

        l1_term += l1(view.rgb, refined) * batch_scale;
        PerceptualResult perc = perceptual(view.rgb, refined);
        perc_term += perc.loss * batch_scale;

        ImageBuffer up = sign_image(view.rgb, refined);
        double n_img = static_cast<double>(up.count());
        for (size_t i = 0; i < up.data.size(); ++i)
          up.data[i] += cfg.beta * n_img * perc.d_a.data[i];
        GradientBundle vb =
            render_backward(d.cloud, cam, in.background, up, ImageBuffer(), nullptr);
        accumulate_view(d.cloud, vb, batch_scale, pixels, total);
      }
    } catch (const Error& e) {
      d.checkpoint(step, {{"aborted", 1.0}});
      d.finish(false, e.what());
      return std::move(d.result);
    }

    RenderedView ref_view = render(d.cloud, in.reference_camera, in.background);
    RefTerm ref = reference_term(ref_view, in, cfg.ref_view_weight);
    GradientBundle rb =
        render_backward(d.cloud, in.reference_camera, in.background, ref.d_rgb, ref.d_alpha);
    accumulate_view(d.cloud, rb, 1.0, pixels, total);

    d.opt.step(d.cloud, total, step, cfg.iters);
    d.maybe_densify(step);

    if ((step + 1) % cfg.checkpoint_interval == 0 || step + 1 == cfg.iters)
      d.checkpoint(step + 1, {{"l1", l1_term}, {"perceptual", perc_term}, {"ref_loss", ref.loss},
                              {"gamma", gamma}});
  }
  d.finish(true);
  return std::move(d.result);
}

StageResult pixelwise_stage(const GaussianCloud& theta1, const StageInputs& in,
                            const StageConfig& cfg, const EnhancerOracle& enhancer,
                            uint64_t seed) {
  StageDriver d(theta1, in, cfg, seed, "pixelwise");
  size_t pixels = static_cast<size_t>(in.reference_camera.width) * in.reference_camera.height;

  for (int step = 0; step < cfg.iters; ++step) {
    Rng step_rng(hash_combine(seed, static_cast<uint64_t>(step)));
    GradientBundle total(d.cloud.size());
    double batch_scale = 1.0 / cfg.batch_views;
    double l1_term = 0.0, perc_term = 0.0;

    try {
      for (int k = 0; k < cfg.batch_views; ++k) {
        Rng vr = step_rng.fork(static_cast<uint64_t>(k));
        Camera cam = sample_pose(vr, in.reference_camera, cfg.elevation_max);
        RenderedView view = render(d.cloud, cam, in.background);

        EnhanceContext ctx;
        ctx.camera = cam;
        ImageBuffer enhanced = enhancer.enhance(view.rgb, ctx);
        require_same_shape(view.rgb, enhanced, "enhanced image");

        l1_term += l1(view.rgb, enhanced) * batch_scale;
        PerceptualResult perc = perceptual(view.rgb, enhanced);
        perc_term += perc.loss * batch_scale;

        ImageBuffer up = sign_image(view.rgb, enhanced);
        double n_img = static_cast<double>(up.count());
        for (size_t i = 0; i < up.data.size(); ++i)
          up.data[i] += cfg.beta * n_img * perc.d_a.data[i];
        GradientBundle vb =
            render_backward(d.cloud, cam, in.background, up, ImageBuffer(), nullptr);
        accumulate_view(d.cloud, vb, batch_scale, pixels, total);
      }
    } catch (const Error& e) {
      d.checkpoint(step, {{"aborted", 1.0}});
      d.finish(false, e.what());
      return std::move(d.result);
    }

    d.opt.step(d.cloud, total, step, cfg.iters);
    d.maybe_densify(step);

    if ((step + 1) % cfg.checkpoint_interval == 0 || step + 1 == cfg.iters)
      d.checkpoint(step + 1, {{"l1", l1_term}, {"perceptual", perc_term}});
  }
  d.finish(true);
  return std::move(d.result);
}

}  // namespace gslift
