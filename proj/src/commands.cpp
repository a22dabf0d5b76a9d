#include "gslift/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gslift/align.hpp"
#include "gslift/cloud_io.hpp"
#include "gslift/image_io.hpp"
#include "gslift/losses.hpp"
#include "gslift/oracles.hpp"
#include "gslift/render.hpp"
#include "gslift/rng.hpp"
#include "gslift/text_io.hpp"

namespace gslift {

namespace {

constexpr uint64_t kCoarseStream = 1;
constexpr uint64_t kViewwiseStream = 2;
constexpr uint64_t kPixelwiseStream = 3;
constexpr uint64_t kHeldOutStream = 0x4e1d;
constexpr uint64_t kAblateStream = 0xab1a;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::file_io, "cannot create " + dir);
}

ImageBuffer quantize8(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (double& v : out.data) v = std::round(clamp01(v) * 255.0) / 255.0;
  return out;
}

struct Dataset {
  std::vector<ManifestEntry> entries;
  Camera ref_cam;
  GaussianCloud full;
  GaussianCloud hair;
  std::string dir;
};

Dataset load_dataset(const std::string& gt_dir) {
  if (gt_dir.empty()) throw Error(ErrorCode::missing_input, "a --gt dataset directory is required");
  Dataset d;
  d.dir = gt_dir;
  d.entries = load_manifest(gt_dir + "/manifest.tsv");
  if (d.entries.empty()) throw Error(ErrorCode::malformed, "manifest has no views");
  d.ref_cam = load_camera_txt(d.entries[0].camera_path);
  d.full = load_cloud(gt_dir + "/gt_full.gs");
  d.hair = load_cloud(gt_dir + "/gt_hair.gs");
  return d;
}

HeldOutSet make_held_out(const Dataset& data, uint64_t seed, int count) {
  HeldOutSet held;
  Vec3 white(1, 1, 1);
  for (int i = 0; i < count; ++i) {
    Camera cam = sample_camera(hash_combine(seed, kHeldOutStream), static_cast<uint64_t>(i),
                               data.ref_cam.width, data.ref_cam.height);
    RenderedView gt = render(data.full, cam, white);
    RenderedView hair = render(data.hair, cam, white);
    ImageBuffer mask(cam.width, cam.height, 1);
    for (size_t px = 0; px < mask.data.size(); ++px)
      mask.data[px] = hair.alpha.data[px] > 0.5 ? 1.0 : 0.0;
    held.cameras.push_back(cam);
    held.rgb.push_back(std::move(gt.rgb));
    held.mask.push_back(std::move(mask));
  }
  return held;
}

double checkpoint_metric(const StageReport& report, const char* name) {
  if (report.checkpoints.empty()) return 0.0;
  for (const auto& kv : report.checkpoints.back().metrics)
    if (kv.first == name) return kv.second;
  return 0.0;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::file_io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::file_io, "short write to " + path);
}

StageSummary summarize(const StageResult& r, const std::string& cloud_path,
                       const std::string& report_path) {
  StageSummary s;
  s.name = r.report.stage;
  s.cloud_path = cloud_path;
  s.report_path = report_path;
  s.psnr_db = checkpoint_metric(r.report, "psnr_heldout");
  s.l1_err = checkpoint_metric(r.report, "l1_heldout");
  s.perceptual_err = checkpoint_metric(r.report, "perceptual_heldout");
  s.primitives = r.cloud.size();
  return s;
}

// Persist whatever the stage produced, then raise on failure so the command
// exits nonzero with the oracle's complaint.
void store_stage(const StageResult& r, const std::string& cloud_path,
                 const std::string& report_path) {
  save_cloud(r.cloud, cloud_path);
  write_text(report_path, report_to_text(r.report));
  if (!r.completed)
    throw Error(ErrorCode::missing_input, r.report.stage + " stage aborted: " + r.error);
}

ImageBuffer single_channel(const ImageBuffer& image, const char* what) {
  if (image.channels == 1) return image;
  if (image.channels == 3) {
    ImageBuffer out(image.width, image.height, 1);
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) out.at(x, y, 0) = image.at(x, y, 0);
    return out;
  }
  throw Error(ErrorCode::dimension_mismatch, std::string(what) + " must be 1 or 3 channel");
}

}  // namespace

GenOutcome cmd_gen(const RunConfig& cfg, const std::string& out_dir) {
  SceneSpec spec;
  spec.seed = cfg.seed;
  spec.style = cfg.scene.style;
  spec.strand_count = cfg.scene.strands;
  spec.gaussians_per_strand = cfg.scene.gaussians_per_strand;
  SceneParts parts = generate_scene_parts(spec);

  DatasetOptions opt;
  opt.n_views = cfg.scene.views;
  opt.random_views = cfg.scene.random_views;
  opt.ring_elevation = cfg.scene.ring_elevation;
  opt.width = cfg.io.width;
  opt.height = cfg.io.height;
  opt.seed = cfg.seed;

  GenOutcome out;
  out.manifest_path = render_dataset(parts, opt, out_dir.empty() ? cfg.io.out_dir : out_dir);
  out.views = opt.n_views;
  out.hair_prims = parts.hair.size();
  out.body_prims = parts.body.size();
  return out;
}

ReconstructOutcome cmd_reconstruct(const RunConfig& cfg, const ReconstructOptions& options) {
  if (options.out_dir.empty()) throw Error(ErrorCode::missing_input, "an --out directory is required");
  Dataset data = load_dataset(options.gt_dir);
  ensure_dir(options.out_dir);
  ReconstructOutcome outcome;

  ImageBuffer input = read_png(options.input_image.empty() ? data.entries[0].image_path
                                                           : options.input_image);
  if (input.channels != 3)
    throw Error(ErrorCode::dimension_mismatch, "input image must be RGB");
  ImageBuffer mask = single_channel(
      read_png(options.mask_image.empty() ? data.dir + "/mask_000.png" : options.mask_image),
      "mask");

  bool aligning = !options.landmarks_hair.empty() || !options.landmarks_body.empty();
  if (aligning) {
    if (options.landmarks_hair.empty() || options.landmarks_body.empty())
      throw Error(ErrorCode::missing_input, "alignment needs both landmark files");
    std::vector<Vec2> lh = load_landmarks(options.landmarks_hair);
    std::vector<Vec2> lb = load_landmarks(options.landmarks_body);
    AlignResult ar = align_landmarks(lh, lb);

    ImageBuffer body = options.body_image.empty()
                           ? ImageBuffer(input.width, input.height, 3, 1.0)
                           : read_png(options.body_image);
    ImageBuffer composed = compose_aligned_image(input, mask, body, ar.transform);
    ImageBuffer ones(input.width, input.height, 3, 1.0);
    ImageBuffer zeros(input.width, input.height, 3, 0.0);
    ImageBuffer warped_mask =
        single_channel(compose_aligned_image(ones, mask, zeros, ar.transform), "mask");

    input = std::move(composed);
    mask = std::move(warped_mask);
    outcome.aligned_path = options.out_dir + "/aligned.png";
    write_png(input, outcome.aligned_path);
    write_png(mask, options.out_dir + "/aligned_mask.png");
    write_kv_report({{"scale", format_num(ar.transform.scale)},
                     {"rotation_rad", format_num(ar.transform.rotation_rad)},
                     {"translation_x", format_num(ar.transform.translation.x())},
                     {"translation_y", format_num(ar.transform.translation.y())},
                     {"rmse", format_num(ar.rmse)}},
                    options.out_dir + "/report_align.txt");
  }
  if (options.stop_after == "align") return outcome;

  if (input.width != data.ref_cam.width || input.height != data.ref_cam.height)
    throw Error(ErrorCode::dimension_mismatch, "input image size vs reference camera");

  GroundTruthSynthesizer synth(
      data.full, data.ref_cam,
      CorruptionParams{cfg.prior.blur_sigma, cfg.prior.jitter_sigma, cfg.seed});
  IdealEnhancer ideal(data.full);
  BlindEnhancer blind(cfg.prior.enhancer_strength, cfg.prior.enhancer_sigma);
  const EnhancerOracle& enhancer =
      cfg.prior.enhancer == "ideal" ? static_cast<const EnhancerOracle&>(ideal)
                                    : static_cast<const EnhancerOracle&>(blind);

  HeldOutSet held = make_held_out(data, cfg.seed, options.held_out_views);
  StageInputs in;
  in.reference_image = input;
  in.reference_mask = mask;
  in.reference_camera = data.ref_cam;
  in.held_out = &held;

  GaussianCloud theta;
  if (options.theta0.empty()) {
    GaussianCloud start = init_cloud(static_cast<size_t>(cfg.init.count),
                                     cfg.init.box_half_extent, cfg.seed);
    StageResult coarse =
        coarse_stage(start, in, cfg.coarse, synth, synth.schedule(),
                     hash_combine(cfg.seed, kCoarseStream));
    std::string cp = options.out_dir + "/theta0.gs";
    std::string rp = options.out_dir + "/report_coarse.txt";
    store_stage(coarse, cp, rp);
    outcome.stages.push_back(summarize(coarse, cp, rp));
    theta = std::move(coarse.cloud);
  } else {
    theta = load_cloud(options.theta0);
  }

  auto finish = [&](const GaussianCloud& final_cloud) {
    std::vector<double> azimuths = {-3 * M_PI / 4, -M_PI / 2, -M_PI / 4, 0,
                                    M_PI / 4,      M_PI / 2,  3 * M_PI / 4};
    int w = data.ref_cam.width, h = data.ref_cam.height;
    ImageBuffer strip(w * static_cast<int>(azimuths.size()), h, 3);
    for (size_t i = 0; i < azimuths.size(); ++i) {
      Camera cam = hemisphere_camera(azimuths[i], cfg.scene.ring_elevation,
                                     (data.ref_cam.position - data.ref_cam.look_at).norm(),
                                     data.ref_cam.look_at, w, h, data.ref_cam.focal_px);
      RenderedView v = render(final_cloud, cam, Vec3(1, 1, 1));
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c)
            strip.at(static_cast<int>(i) * w + x, y, c) = v.rgb.at(x, y, c);
    }
    outcome.turntable_path = options.out_dir + "/turntable.png";
    write_png(strip, outcome.turntable_path);
  };

  if (options.stop_after == "coarse") {
    finish(theta);
    return outcome;
  }

  StageResult vw = viewwise_stage(theta, in, cfg.viewwise, synth,
                                  hash_combine(cfg.seed, kViewwiseStream));
  {
    std::string cp = options.out_dir + "/theta1.gs";
    std::string rp = options.out_dir + "/report_viewwise.txt";
    store_stage(vw, cp, rp);
    outcome.stages.push_back(summarize(vw, cp, rp));
  }
  if (options.stop_after == "viewwise") {
    finish(vw.cloud);
    return outcome;
  }

  StageResult px = pixelwise_stage(vw.cloud, in, cfg.pixelwise, enhancer,
                                   hash_combine(cfg.seed, kPixelwiseStream));
  {
    std::string cp = options.out_dir + "/theta2.gs";
    std::string rp = options.out_dir + "/report_pixelwise.txt";
    store_stage(px, cp, rp);
    outcome.stages.push_back(summarize(px, cp, rp));
  }
  finish(px.cloud);
  return outcome;
}

EvalOutcome cmd_eval(const std::string& cloud_path, const std::string& manifest_path,
                     const std::string& hair_cloud_path, const std::string& report_path) {
  GaussianCloud cloud = load_cloud(cloud_path);
  GaussianCloud hair = load_cloud(hair_cloud_path);
  std::vector<ManifestEntry> entries = load_manifest(manifest_path);
  Vec3 white(1, 1, 1);

  EvalOutcome out;
  int used = 0;
  for (const ManifestEntry& e : entries) {
    Camera cam = load_camera_txt(e.camera_path);
    ImageBuffer target = read_png(e.image_path);
    if (target.width != cam.width || target.height != cam.height)
      throw Error(ErrorCode::dimension_mismatch, "stored image size vs camera " + e.camera_path);

    RenderedView hair_view = render(hair, cam, white);
    ImageBuffer mask(cam.width, cam.height, 1);
    size_t on = 0;
    for (size_t px = 0; px < mask.data.size(); ++px) {
      mask.data[px] = hair_view.alpha.data[px] > 0.5 ? 1.0 : 0.0;
      on += mask.data[px] > 0.5;
    }

    EvalRow row;
    row.index = e.index;
    row.mask_pixels = on;
    if (on > 0) {
      ImageBuffer rendered = quantize8(render(cloud, cam, white).rgb);
      row.l1_err = l1(rendered, target, &mask);
      row.psnr_db = psnr(rendered, target, &mask);
      row.perceptual_err = masked_perceptual(rendered, target, mask);
      out.mean.l1_err += row.l1_err;
      out.mean.psnr_db += row.psnr_db;
      out.mean.perceptual_err += row.perceptual_err;
      out.mean.mask_pixels += on;
      ++used;
    }
    out.rows.push_back(row);
  }
  if (used > 0) {
    out.mean.l1_err /= used;
    out.mean.psnr_db /= used;
    out.mean.perceptual_err /= used;
  }
  out.mean.index = -1;

  if (!report_path.empty()) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const EvalRow& r : out.rows) {
      std::string p = "view_" + std::to_string(r.index) + ".";
      rows.push_back({p + "mask_pixels", std::to_string(r.mask_pixels)});
      if (r.mask_pixels > 0) {
        rows.push_back({p + "l1", format_num(r.l1_err)});
        rows.push_back({p + "psnr_db", format_num(r.psnr_db)});
        rows.push_back({p + "perceptual", format_num(r.perceptual_err)});
      }
    }
    rows.push_back({"mean.l1", format_num(out.mean.l1_err)});
    rows.push_back({"mean.psnr_db", format_num(out.mean.psnr_db)});
    rows.push_back({"mean.perceptual", format_num(out.mean.perceptual_err)});
    rows.push_back({"mean.views_used", std::to_string(used)});
    write_kv_report(rows, report_path);
    out.report_path = report_path;
  }
  return out;
}

AblateOutcome cmd_ablate_gamma(const RunConfig& cfg, const AblateOptions& options) {
  if (options.out_dir.empty()) throw Error(ErrorCode::missing_input, "an --out directory is required");
  Dataset data = load_dataset(options.gt_dir);
  ensure_dir(options.out_dir);

  ImageBuffer input = read_png(data.entries[0].image_path);
  ImageBuffer mask = single_channel(read_png(data.dir + "/mask_000.png"), "mask");

  GroundTruthSynthesizer synth(
      data.full, data.ref_cam,
      CorruptionParams{cfg.prior.blur_sigma, cfg.prior.jitter_sigma, cfg.seed});
  HeldOutSet held = make_held_out(data, cfg.seed, options.held_out_views);

  StageInputs in;
  in.reference_image = input;
  in.reference_mask = mask;
  in.reference_camera = data.ref_cam;
  in.held_out = &held;

  GaussianCloud theta0;
  if (options.theta0.empty()) {
    GaussianCloud start = init_cloud(static_cast<size_t>(cfg.init.count),
                                     cfg.init.box_half_extent, cfg.seed);
    StageResult coarse = coarse_stage(start, in, cfg.coarse, synth, synth.schedule(),
                                      hash_combine(cfg.seed, kCoarseStream));
    if (!coarse.completed)
      throw Error(ErrorCode::missing_input, "coarse stage aborted: " + coarse.error);
    theta0 = std::move(coarse.cloud);
  } else {
    theta0 = load_cloud(options.theta0);
  }

  auto snapshot_run = [&](const StageConfig& stage_cfg, uint64_t stream) {
    StageResult r = viewwise_stage(theta0, in, stage_cfg, synth,
                                   hash_combine(cfg.seed, stream));
    if (!r.completed)
      throw Error(ErrorCode::missing_input, "viewwise stage aborted: " + r.error);
    std::vector<AblateRow> rows;
    for (const Checkpoint& c : r.report.checkpoints) {
      if (c.step % stage_cfg.checkpoint_interval != 0) continue;
      AblateRow row;
      row.step = c.step;
      row.gamma = gamma_at(c.step - 1, stage_cfg);
      for (const auto& kv : c.metrics) {
        if (kv.first == "l1_heldout") row.l1_err = kv.second;
        if (kv.first == "perceptual_heldout") row.perceptual_err = kv.second;
        if (kv.first == "psnr_heldout") row.psnr_db = kv.second;
      }
      rows.push_back(row);
    }
    return rows;
  };

  StageConfig sched_cfg = cfg.viewwise;
  sched_cfg.checkpoint_interval = sched_cfg.gamma_period;
  AblateOutcome out;
  out.scheduled = snapshot_run(sched_cfg, kAblateStream);

  if (options.fixed_gamma >= 0.0) {
    StageConfig fixed_cfg = sched_cfg;
    fixed_cfg.gamma_start = options.fixed_gamma;
    fixed_cfg.gamma_increment = 0.0;
    out.fixed = snapshot_run(fixed_cfg, kAblateStream);
  }

  std::ostringstream table;
  auto write_block = [&table](const std::string& header, const std::vector<AblateRow>& rows,
                              bool label_gamma) {
    table << header << "\n";
    table << "metric";
    char cell[64];
    for (const AblateRow& r : rows) {
      if (label_gamma)
        std::snprintf(cell, sizeof(cell), "gamma=%.2f", r.gamma);
      else
        std::snprintf(cell, sizeof(cell), "step=%d", r.step);
      table << "\t" << cell;
    }
    table << "\nstep";
    for (const AblateRow& r : rows) table << "\t" << r.step;
    table << "\nmasked_l1";
    for (const AblateRow& r : rows) table << "\t" << format_num(r.l1_err);
    table << "\nperceptual";
    for (const AblateRow& r : rows) table << "\t" << format_num(r.perceptual_err);
    table << "\npsnr_db";
    for (const AblateRow& r : rows) table << "\t" << format_num(r.psnr_db);
    table << "\n";
  };

  write_block("# gamma schedule", out.scheduled, true);
  if (!out.fixed.empty()) {
    table << "\n";
    char hdr[64];
    std::snprintf(hdr, sizeof(hdr), "# control fixed gamma=%.2f", options.fixed_gamma);
    write_block(hdr, out.fixed, false);
  }
  out.table_path = options.out_dir + "/ablate_gamma.txt";
  write_text(out.table_path, table.str());
  return out;
}

}  // namespace gslift
