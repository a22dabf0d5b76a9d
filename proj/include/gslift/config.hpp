#pragma once

#include <string>
#include <vector>

#include "gslift/scenegen.hpp"
#include "gslift/stages.hpp"

namespace gslift {

// Full run configuration. INI sections map onto the nested structs; stage
// sections are [coarse], [viewwise], [pixelwise]. Unknown keys are rejected.
struct RunConfig {
  uint64_t seed = 1;

  struct Io {
    std::string out_dir = "out";
    int width = 512;
    int height = 512;
  } io;

  struct Scene {
    HairStyle style = HairStyle::straight;
    int strands = 40;
    int gaussians_per_strand = 24;
    int views = 180;
    bool random_views = false;
    double ring_elevation = 0.35;
  } scene;

  struct Prior {
    double blur_sigma = 1.5;
    double jitter_sigma = 0.015;
    std::string enhancer = "ideal";  // or "blind"
    double enhancer_strength = 1.0;
    double enhancer_sigma = 1.5;
  } prior;

  struct Init {
    int count = 5000;
    double box_half_extent = 0.3;
  } init;

  StageConfig coarse;
  StageConfig viewwise;
  StageConfig pixelwise;

  void validate() const;
};

// Defaults with the per-stage cadences applied (coarse densifies every 100
// steps at 0.01, the refinement stages every 200 at 0.0002).
RunConfig default_run_config();

// Parse INI text into cfg. Lines are key=value within [section] headers;
// '#' and ';' start comments. Unknown sections or keys throw config errors.
void parse_config_text(const std::string& text, RunConfig& cfg);

// Apply one "section.key=value" override.
void apply_override(const std::string& assignment, RunConfig& cfg);

// File (optional; empty path keeps defaults) then overrides, then validate.
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace gslift
