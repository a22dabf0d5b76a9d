#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gslift/commands.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  int64_t seed = -1;  // -1 keeps the config value
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "INI config file");
  cmd->add_option("--set", args.overrides, "Override section.key=value (repeatable)");
  cmd->add_option("--seed", args.seed, "Override the run seed");
}

gslift::RunConfig make_config(const CommonArgs& args) {
  gslift::RunConfig cfg = gslift::load_run_config(args.config_path, args.overrides);
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strand-scene Gaussian splat reconstruction toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  std::string gen_out;
  int gen_views = -1;
  CLI::App* gen = app.add_subcommand("gen", "Generate a ground-truth scene dataset");
  add_common(gen, gen_args);
  gen->add_option("--out", gen_out, "Output directory (default io.out_dir)");
  gen->add_option("--views", gen_views, "Number of views (default scene.views)");

  CommonArgs rec_args;
  gslift::ReconstructOptions rec_opt;
  CLI::App* rec = app.add_subcommand("reconstruct", "Reconstruct a cloud from a reference view");
  add_common(rec, rec_args);
  rec->add_option("--gt", rec_opt.gt_dir, "Ground-truth dataset directory")->required();
  rec->add_option("--out", rec_opt.out_dir, "Run output directory")->required();
  rec->add_option("--input", rec_opt.input_image, "Reference image (default: dataset view 0)");
  rec->add_option("--mask", rec_opt.mask_image, "Hair mask (default: dataset mask 0)");
  rec->add_option("--landmarks-hair", rec_opt.landmarks_hair, "68-point landmark file");
  rec->add_option("--landmarks-body", rec_opt.landmarks_body, "68-point landmark file");
  rec->add_option("--body-image", rec_opt.body_image, "Compose target image");
  rec->add_option("--stop-after", rec_opt.stop_after, "align | coarse | viewwise")
      ->check(CLI::IsMember({"align", "coarse", "viewwise"}));
  rec->add_option("--theta0", rec_opt.theta0, "Skip coarse; start from this cloud");
  rec->add_option("--held-out-views", rec_opt.held_out_views, "Views for checkpoint metrics");

  std::string eval_cloud, eval_manifest, eval_hair, eval_report;
  CLI::App* ev = app.add_subcommand("eval", "Masked metrics of a cloud against a dataset");
  ev->add_option("--cloud", eval_cloud, "Cloud file to evaluate")->required();
  ev->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
  ev->add_option("--hair", eval_hair, "Hair-only cloud (mask source)")->required();
  ev->add_option("--report", eval_report, "Report path (default <cloud>.eval.txt)");

  CommonArgs ab_args;
  gslift::AblateOptions ab_opt;
  CLI::App* ab = app.add_subcommand("ablate-gamma", "Snapshot metrics across the gamma schedule");
  add_common(ab, ab_args);
  ab->add_option("--gt", ab_opt.gt_dir, "Ground-truth dataset directory")->required();
  ab->add_option("--out", ab_opt.out_dir, "Output directory")->required();
  ab->add_option("--theta0", ab_opt.theta0, "Starting cloud (coarse runs when omitted)");
  ab->add_option("--fixed-gamma", ab_opt.fixed_gamma, "Also run a constant-gamma control");
  ab->add_option("--held-out-views", ab_opt.held_out_views, "Views for snapshot metrics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error:usage:%s\n", e.what());
    return 2;
  }

  try {
    if (gen->parsed()) {
      gslift::RunConfig cfg = make_config(gen_args);
      if (gen_views > 0) cfg.scene.views = gen_views;
      gslift::GenOutcome out = gslift::cmd_gen(cfg, gen_out);
      std::printf("%s\n", out.manifest_path.c_str());
      std::printf("views=%d hair=%zu body=%zu\n", out.views, out.hair_prims, out.body_prims);
    } else if (rec->parsed()) {
      gslift::RunConfig cfg = make_config(rec_args);
      gslift::ReconstructOutcome out = gslift::cmd_reconstruct(cfg, rec_opt);
      for (const gslift::StageSummary& s : out.stages)
        std::printf("%s: %s (%zu primitives, psnr %.3f dB)\n", s.name.c_str(),
                    s.cloud_path.c_str(), s.primitives, s.psnr_db);
      if (!out.aligned_path.empty()) std::printf("aligned: %s\n", out.aligned_path.c_str());
      if (!out.turntable_path.empty()) std::printf("turntable: %s\n", out.turntable_path.c_str());
    } else if (ev->parsed()) {
      if (eval_report.empty()) eval_report = eval_cloud + ".eval.txt";
      gslift::EvalOutcome out = gslift::cmd_eval(eval_cloud, eval_manifest, eval_hair,
                                                 eval_report);
      std::printf("mean l1=%.6f psnr_db=%.3f perceptual=%.4f\n", out.mean.l1_err,
                  out.mean.psnr_db, out.mean.perceptual_err);
      std::printf("%s\n", out.report_path.c_str());
    } else if (ab->parsed()) {
      gslift::RunConfig cfg = make_config(ab_args);
      gslift::AblateOutcome out = gslift::cmd_ablate_gamma(cfg, ab_opt);
      for (const gslift::AblateRow& r : out.scheduled)
        std::printf("step=%d gamma=%.2f masked_l1=%.6f perceptual=%.4f psnr_db=%.3f\n", r.step,
                    r.gamma, r.l1_err, r.perceptual_err, r.psnr_db);
      std::printf("%s\n", out.table_path.c_str());
    }
  } catch (const gslift::Error& e) {
    std::fprintf(stderr, "%s\n", e.formatted().c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error:internal:%s\n", e.what());
    return 1;
  }
  return 0;
}
