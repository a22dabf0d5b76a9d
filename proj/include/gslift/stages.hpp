#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gslift/densify.hpp"
#include "gslift/optimizer.hpp"
#include "gslift/oracle.hpp"
#include "gslift/schedule.hpp"
#include "gslift/types.hpp"

namespace gslift {

struct StageConfig {
  int iters = 1000;
  int batch_views = 4;
  double lr_position = 0.001;
  double lr_color = 0.01;
  double lr_opacity = 0.05;
  double lr_scale = 0.005;
  double lr_rotation = 0.005;
  double lr_floor = 2e-5;
  double clip_norm = 1.0;
  bool adam = true;  // plain descent stalls well short of the coarse fit
  int densify_interval = 100;
  double densify_grad_threshold = 0.01;
  double prune_opacity_threshold = 0.01;
  double gamma_start = 0.5;
  double gamma_increment = 0.15;
  int gamma_period = 200;
  double beta = 0.5;           // perceptual weight
  double ref_view_weight = 1.0;
  int checkpoint_interval = 100;
  double elevation_max = 1.2;  // pose sampling cap, radians above horizon

  void validate() const;
  OptimizerConfig optimizer_config() const;
};

// gamma_start + gamma_increment per gamma_period steps, capped at 1.
double gamma_at(int step, const StageConfig& cfg);

// Uniform centers in [-e, e]^3, scales from the mean nearest-neighbor
// distance, opacity 0.1, mid-gray, identity rotations.
GaussianCloud init_cloud(size_t n, double box_half_extent, uint64_t seed);

// Camera on the sphere of the given radius around look_at. Azimuth 0 looks
// down -z from +z (the frontal direction); elevation raises the camera.
Camera hemisphere_camera(double azimuth, double elevation, double radius, const Vec3& look_at,
                         int width, int height, double focal_px);

// Held-out ground-truth views for checkpoint quality tracking.
struct HeldOutSet {
  std::vector<Camera> cameras;
  std::vector<ImageBuffer> rgb;
  std::vector<ImageBuffer> mask;  // 1 channel each
};

struct Checkpoint {
  int step = 0;  // 1-based, recorded after the step's update
  std::vector<std::pair<std::string, double>> metrics;
};

struct DensifyEvent {
  int step = 0;
  DensifyReport report;
};

struct StageReport {
  std::string stage;
  std::vector<Checkpoint> checkpoints;
  std::vector<DensifyEvent> densify_events;
  double wall_seconds = 0.0;
};

// key=value lines, one checkpoint metric per line as <name>_<step>=<value>.
std::string report_to_text(const StageReport& report);

struct StageResult {
  GaussianCloud cloud;
  StageReport report;
  bool completed = false;
  std::string error;  // oracle failure detail when completed == false
};

struct StageInputs {
  ImageBuffer reference_image;  // aligned subject view, 3 channels
  ImageBuffer reference_mask;   // 1 channel
  Camera reference_camera;
  Vec3 background = Vec3(1.0, 1.0, 1.0);
  const HeldOutSet* held_out = nullptr;
};

// Distillation from the novel-view prior plus reference-view supervision.
StageResult coarse_stage(const GaussianCloud& init, const StageInputs& in, const StageConfig& cfg,
                         const SynthesizerOracle& synth, const NoiseSchedule& schedule,
                         uint64_t seed);

// Refinement against prior-denoised blends of the current renders.
StageResult viewwise_stage(const GaussianCloud& theta0, const StageInputs& in,
                           const StageConfig& cfg, const SynthesizerOracle& synth, uint64_t seed);

// Detail recovery against enhanced renders.
StageResult pixelwise_stage(const GaussianCloud& theta1, const StageInputs& in,
                            const StageConfig& cfg, const EnhancerOracle& enhancer, uint64_t seed);

}  // namespace gslift
