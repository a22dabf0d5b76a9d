#pragma once

#include <string>
#include <vector>

#include "gslift/config.hpp"

namespace gslift {

struct GenOutcome {
  std::string manifest_path;
  int views = 0;
  size_t hair_prims = 0;
  size_t body_prims = 0;
};

// Generate the scene from cfg and write the dataset. out_dir overrides
// cfg.io.out_dir when non-empty.
GenOutcome cmd_gen(const RunConfig& cfg, const std::string& out_dir = "");

struct ReconstructOptions {
  std::string gt_dir;    // dataset directory produced by cmd_gen (required)
  std::string out_dir;   // run outputs (required)
  std::string input_image;  // overrides the dataset's frontal view as I_a
  std::string mask_image;   // overrides the dataset's frontal hair mask
  std::string landmarks_hair;  // with landmarks_body enables alignment
  std::string landmarks_body;
  std::string body_image;  // compose target; white if empty
  std::string stop_after;  // "align", "coarse", "viewwise", or "" for all
  std::string theta0;      // resume: skip the coarse stage, load this cloud
  int held_out_views = 20;
};

struct StageSummary {
  std::string name;
  std::string cloud_path;
  std::string report_path;
  double psnr_db = 0.0;
  double l1_err = 0.0;
  double perceptual_err = 0.0;
  size_t primitives = 0;
};

struct ReconstructOutcome {
  std::vector<StageSummary> stages;
  std::string aligned_path;    // set when alignment ran
  std::string turntable_path;  // 7-view strip of the last stage's cloud
};

ReconstructOutcome cmd_reconstruct(const RunConfig& cfg, const ReconstructOptions& options);

struct EvalRow {
  int index = 0;  // -1 for the mean row
  double l1_err = 0.0;
  double psnr_db = 0.0;
  double perceptual_err = 0.0;
  size_t mask_pixels = 0;
};

struct EvalOutcome {
  std::vector<EvalRow> rows;
  EvalRow mean;  // over views with a non-empty mask
  std::string report_path;
};

// Render cloud_path from every manifest camera and report masked metrics;
// the mask is the hair-only cloud's alpha thresholded at 0.5. Renders are
// quantized to the dataset's 8-bit depth first, so the ground-truth cloud
// scores exactly zero error against its own dataset.
EvalOutcome cmd_eval(const std::string& cloud_path, const std::string& manifest_path,
                     const std::string& hair_cloud_path, const std::string& report_path);

struct AblateOptions {
  std::string gt_dir;   // dataset directory (required)
  std::string out_dir;  // table + snapshots (required)
  std::string theta0;   // optional starting cloud; coarse runs when empty
  double fixed_gamma = -1.0;  // >= 0 adds a constant-gamma control run
  int held_out_views = 20;
};

struct AblateRow {
  int step = 0;
  double gamma = 0.0;
  double l1_err = 0.0;
  double perceptual_err = 0.0;
  double psnr_db = 0.0;
};

struct AblateOutcome {
  std::vector<AblateRow> scheduled;
  std::vector<AblateRow> fixed;  // control run, when requested
  std::string table_path;
};

// View-wise refinement with metric snapshots at every gamma period
// (default steps 200/400/600), emitted as a labeled-column table.
AblateOutcome cmd_ablate_gamma(const RunConfig& cfg, const AblateOptions& options);

}  // namespace gslift
