#pragma once

#include <cstdint>
#include <string>

#include "gslift/types.hpp"

namespace gslift {

enum class HairStyle { straight, wavy, bun, braid };

HairStyle style_from_string(const std::string& name);
const char* style_name(HairStyle style);

struct Palette {
  Vec3 base = Vec3(0.35, 0.20, 0.12);  // chestnut
  double variation = 0.06;             // per-strand color wobble
};

struct SceneSpec {
  uint64_t seed = 0;
  HairStyle style = HairStyle::straight;
  int strand_count = 40;
  int gaussians_per_strand = 24;
  Vec3 head_center = Vec3(0, 0.10, 0);  // neck sits at the origin
  double head_radius = 0.13;
  Palette palette;

  void validate() const;
};

// Hair and body clouds plus their concatenation (hair first). Hair
// primitives are strand-major: strand k owns indices
// [k*gaussians_per_strand, (k+1)*gaussians_per_strand).
struct SceneParts {
  GaussianCloud hair;
  GaussianCloud body;
  GaussianCloud full;
};

SceneParts generate_scene_parts(const SceneSpec& spec);
GaussianCloud generate_scene(const SceneSpec& spec);

// Axis frame the braid helices wind around; exposed so the interleaving
// (phases 2pi/3 apart) can be checked from generated centers.
struct BraidFrame {
  Vec3 origin;
  Vec3 axis;
  Vec3 e1;
  Vec3 e2;
};

BraidFrame braid_frame(const SceneSpec& spec);

// 50mm lens on a 36mm-wide sensor.
double default_focal_px(int width);

// Area-uniform random camera on the upper hemisphere of radius 1.05 around
// the neck (origin), looking at it.
Camera sample_camera(uint64_t seed, uint64_t index, int width = 512, int height = 512);

// Evenly spaced azimuth ring at fixed elevation; index 0 is frontal.
Camera ring_camera(int index, int count = 180, double elevation = 0.35, int width = 512,
                   int height = 512);

struct DatasetOptions {
  int n_views = 180;
  bool random_views = false;  // ring cameras when false; view 0 stays frontal
  double ring_elevation = 0.35;
  int width = 512;
  int height = 512;
  uint64_t seed = 0;
};

// Writes view_%03d.png, cam_%03d.txt, mask_%03d.png (hair alpha > 0.5),
// gt_full.gs, gt_hair.gs and manifest.tsv under out_dir; returns the
// manifest path. View 0 is always the frontal reference.
std::string render_dataset(const SceneParts& scene, const DatasetOptions& options,
                           const std::string& out_dir);

}  // namespace gslift
