#include "gslift/scenegen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "gslift/cloud_io.hpp"
#include "gslift/image_io.hpp"
#include "gslift/render.hpp"
#include "gslift/rng.hpp"
#include "gslift/text_io.hpp"

namespace gslift {

namespace {

constexpr double kStrandRadius = 0.003;
constexpr double kStrandOpacity = 0.85;
constexpr double kCameraRadius = 1.05;

Vec3 down() { return Vec3(0, -1, 0); }

// Quaternion taking the x axis onto dir (unit). The antipodal case rotates
// about y.
Vec4 x_axis_to(const Vec3& dir) {
  Vec3 x(1, 0, 0);
  double w = 1.0 + x.dot(dir);
  if (w < 1e-12) return Vec4(0, 0, 1, 0);
  Vec3 v = x.cross(dir);
  Vec4 q(w, v.x(), v.y(), v.z());
  return q / q.norm();
}

Vec3 sample_root(Rng& rng, const SceneSpec& spec) {
  double azimuth = rng.uniform(-M_PI, M_PI);
  double elevation = std::asin(rng.uniform());  // area-uniform upper half
  Vec3 dir(std::sin(azimuth) * std::cos(elevation), std::sin(elevation),
           std::cos(azimuth) * std::cos(elevation));
  return spec.head_center + spec.head_radius * dir;
}

void keep_outside_head(Vec3& p, const SceneSpec& spec, double gap = 0.004) {
  Vec3 d = p - spec.head_center;
  double n = d.norm();
  double min_r = spec.head_radius + gap;
  if (n < min_r) p = spec.head_center + d * (min_r / std::max(n, 1e-12));
}

std::vector<Vec3> straight_polyline(Rng& rng, const SceneSpec& spec, int points) {
  Vec3 root = sample_root(rng, spec);
  std::vector<Vec3> pts{root};
  Vec3 dir = (root - spec.head_center).normalized();
  double ds = 0.30 / (points - 1);
  for (int k = 1; k < points; ++k) {
    double pull = 0.25 + 0.75 * double(k) / points;  // gravity takes over
    dir = ((1.0 - pull) * dir + pull * down()).normalized();
    Vec3 p = pts.back() + dir * ds;
    keep_outside_head(p, spec);
    pts.push_back(p);
  }
  return pts;
}

std::vector<Vec3> wavy_polyline(Rng& rng, const SceneSpec& spec, int points) {
  std::vector<Vec3> pts = straight_polyline(rng, spec, points);
  Vec3 out = (pts[0] - spec.head_center).normalized();
  Vec3 side = out.cross(down());
  if (side.norm() < 1e-6) side = Vec3(1, 0, 0);
  side.normalize();
  double phase = rng.uniform(0, 2 * M_PI);
  for (int k = 1; k < points; ++k) {
    double s = double(k) / (points - 1);
    pts[k] += 0.012 * std::sin(2 * M_PI * 3.5 * s + phase) * s * side;
    keep_outside_head(pts[k], spec);
  }
  return pts;
}

std::vector<Vec3> bun_polyline(Rng& rng, const SceneSpec& spec, int points) {
  Vec3 root = sample_root(rng, spec);
  Vec3 n = Vec3(0, 0.55, -1).normalized();  // bun sits high on the back
  Vec3 center = spec.head_center + (spec.head_radius + 0.03) * n;
  Vec3 e1 = down().cross(n).normalized();
  Vec3 e2 = n.cross(e1);

  double major = 0.045, minor = 0.018;
  double u0 = rng.uniform(0, 2 * M_PI);
  double v0 = rng.uniform(0, 2 * M_PI);
  double windings = rng.uniform(1.8, 2.6);

  auto torus_point = [&](double u, double v) {
    return center + (major + minor * std::cos(v)) * (std::cos(u) * e1 + std::sin(u) * e2) +
           minor * std::sin(v) * n;
  };

  std::vector<Vec3> pts{root};
  int lead = std::max(2, points / 4);
  Vec3 entry = torus_point(u0, v0);
  for (int k = 1; k < lead; ++k) {
    double s = double(k) / lead;
    Vec3 p = (1 - s) * root + s * entry;
    keep_outside_head(p, spec);
    pts.push_back(p);
  }
  for (int k = lead; k < points; ++k) {
    double s = double(k - lead) / std::max(1, points - 1 - lead);
    pts.push_back(torus_point(u0 + windings * 2 * M_PI * s, v0 + 0.9 * 2 * M_PI * s));
  }
  return pts;
}

std::vector<Vec3> braid_polyline(Rng& rng, const SceneSpec& spec, int points, int strand_index,
                                 const BraidFrame& frame) {
  Vec3 root = sample_root(rng, spec);
  int group = strand_index % 3;
  double phase = 2 * M_PI * group / 3.0 + rng.uniform(-0.04, 0.04);
  double rho = 0.022 * (1.0 + rng.uniform(-0.06, 0.06));
  double length = 0.26, turns = 2.5;

  auto helix_point = [&](double s) {
    double a = 2 * M_PI * turns * s + phase;
    return frame.origin + frame.axis * (length * s) +
           rho * (std::cos(a) * frame.e1 + std::sin(a) * frame.e2);
  };

  std::vector<Vec3> pts{root};
  int lead = std::max(2, points / 5);
  Vec3 entry = helix_point(0.0);
  for (int k = 1; k < lead; ++k) {
    double s = double(k) / lead;
    Vec3 p = (1 - s) * root + s * entry;
    keep_outside_head(p, spec);
    pts.push_back(p);
  }
  for (int k = lead; k < points; ++k)
    pts.push_back(helix_point(double(k - lead) / std::max(1, points - 1 - lead)));
  return pts;
}

void append_strand(GaussianCloud& cloud, const std::vector<Vec3>& pts, const Vec3& color,
                   int segments) {
  for (int j = 0; j < segments; ++j) {
    const Vec3& a = pts[j];
    const Vec3& b = pts[j + 1];
    Vec3 mid = 0.5 * (a + b);
    Vec3 t = b - a;
    double len = t.norm();
    if (len < 1e-9) {
      t = Vec3(1, 0, 0);
      len = 1e-6;
    } else {
      t /= len;
    }
    GaussianPrimitive p;
    for (int d = 0; d < 3; ++d) p.center[d] = static_cast<float>(mid[d]);
    p.log_scale[0] = static_cast<float>(std::log(0.5 * len));
    p.log_scale[1] = static_cast<float>(std::log(kStrandRadius));
    p.log_scale[2] = static_cast<float>(std::log(kStrandRadius));
    Vec4 q = x_axis_to(t);
    for (int d = 0; d < 4; ++d) p.rotation[d] = static_cast<float>(q[d]);
    p.opacity_logit = static_cast<float>(logit(kStrandOpacity));
    double shade = 0.85 + 0.30 * double(j) / std::max(1, segments - 1);
    for (int d = 0; d < 3; ++d) p.color[d] = static_cast<float>(clamp01(shade * color[d]));
    cloud.prims.push_back(p);
  }
}

void append_blob(GaussianCloud& cloud, const Vec3& center, double sigma, const Vec3& color,
                 double opacity) {
  GaussianPrimitive p;
  for (int d = 0; d < 3; ++d) p.center[d] = static_cast<float>(center[d]);
  for (int d = 0; d < 3; ++d) p.log_scale[d] = static_cast<float>(std::log(sigma));
  p.rotation = {1.f, 0.f, 0.f, 0.f};
  p.opacity_logit = static_cast<float>(logit(opacity));
  for (int d = 0; d < 3; ++d) p.color[d] = static_cast<float>(clamp01(color[d]));
  cloud.prims.push_back(p);
}

GaussianCloud generate_body(const SceneSpec& spec) {
  GaussianCloud body;
  Rng rng(hash_combine(spec.seed, 0xb0d7u));
  Vec3 gray(0.55, 0.55, 0.55);

  // Head: fibonacci point set for even coverage of the sphere.
  int n_head = 400;
  double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_head; ++i) {
    double y = 1.0 - 2.0 * (i + 0.5) / n_head;
    double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    double a = golden * i;
    Vec3 dir(std::cos(a) * r, y, std::sin(a) * r);
    Vec3 tint = gray + Vec3::Constant(rng.uniform(-0.03, 0.03));
    append_blob(body, spec.head_center + spec.head_radius * dir, 0.013, tint, 0.95);
  }

  // Neck: rings from the head underside to the origin.
  double head_bottom = spec.head_center.y() - spec.head_radius;
  for (int ring = 0; ring < 6; ++ring) {
    double y = head_bottom + (0.0 - head_bottom) * (ring + 0.5) / 6.0 - 0.02;
    for (int k = 0; k < 10; ++k) {
      double a = 2 * M_PI * k / 10.0;
      Vec3 c(0.035 * std::cos(a), y, 0.035 * std::sin(a));
      append_blob(body, c, 0.012, gray + Vec3::Constant(rng.uniform(-0.03, 0.03)), 0.95);
    }
  }

  // Shoulders: a horizontal bar below the neck.
  for (int k = 0; k < 24; ++k) {
    double x = -0.16 + 0.32 * k / 23.0;
    append_blob(body, Vec3(x, -0.11, 0.0), 0.035, gray + Vec3::Constant(rng.uniform(-0.03, 0.03)),
                0.95);
  }
  body.reset_stats();
  return body;
}

}  // namespace

void SceneSpec::validate() const {
  if (strand_count < 1) throw Error(ErrorCode::bad_value, "strand_count must be >= 1");
  if (gaussians_per_strand < 1)
    throw Error(ErrorCode::bad_value, "gaussians_per_strand must be >= 1");
  if (!(head_radius > 0)) throw Error(ErrorCode::bad_value, "head_radius must be > 0");
  if (palette.variation < 0) throw Error(ErrorCode::bad_value, "palette variation must be >= 0");
}

HairStyle style_from_string(const std::string& name) {
  if (name == "straight") return HairStyle::straight;
  if (name == "wavy") return HairStyle::wavy;
  if (name == "bun") return HairStyle::bun;
  if (name == "braid") return HairStyle::braid;
  throw Error(ErrorCode::bad_value, "unknown style '" + name + "'");
}

const char* style_name(HairStyle style) {
  switch (style) {
    case HairStyle::straight: return "straight";
    case HairStyle::wavy: return "wavy";
    case HairStyle::bun: return "bun";
    case HairStyle::braid: return "braid";
  }
  return "straight";
}

BraidFrame braid_frame(const SceneSpec& spec) {
  BraidFrame f;
  f.origin = spec.head_center + spec.head_radius * Vec3(0, -0.25, -1).normalized();
  f.axis = Vec3(0, -1, -0.35).normalized();
  f.e1 = f.axis.cross(Vec3(1, 0, 0)).normalized();
  f.e2 = f.axis.cross(f.e1);
  return f;
}

SceneParts generate_scene_parts(const SceneSpec& spec) {
  spec.validate();
  SceneParts parts;
  BraidFrame frame = braid_frame(spec);
  int points = spec.gaussians_per_strand + 1;

  for (int k = 0; k < spec.strand_count; ++k) {
    Rng rng(hash_combine(hash_combine(spec.seed, 0x5712a4du), static_cast<uint64_t>(k)));
    std::vector<Vec3> pts;
    switch (spec.style) {
      case HairStyle::straight: pts = straight_polyline(rng, spec, points); break;
      case HairStyle::wavy: pts = wavy_polyline(rng, spec, points); break;
      case HairStyle::bun: pts = bun_polyline(rng, spec, points); break;
      case HairStyle::braid: pts = braid_polyline(rng, spec, points, k, frame); break;
    }
    Vec3 color = spec.palette.base;
    for (int d = 0; d < 3; ++d)
      color[d] = clamp01(color[d] + rng.uniform(-spec.palette.variation, spec.palette.variation));
    append_strand(parts.hair, pts, color, spec.gaussians_per_strand);
  }
  parts.hair.reset_stats();

  parts.body = generate_body(spec);
  parts.full.prims = parts.hair.prims;
  parts.full.prims.insert(parts.full.prims.end(), parts.body.prims.begin(),
                          parts.body.prims.end());
  parts.full.reset_stats();
  return parts;
}

GaussianCloud generate_scene(const SceneSpec& spec) { return generate_scene_parts(spec).full; }

double default_focal_px(int width) { return 50.0 / 36.0 * width; }

Camera sample_camera(uint64_t seed, uint64_t index, int width, int height) {
  Rng rng(hash_combine(seed, index));
  double azimuth = rng.uniform(-M_PI, M_PI);
  double elevation = std::asin(rng.uniform());
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.focal_px = default_focal_px(width);
  cam.look_at = Vec3(0, 0, 0);
  cam.position = kCameraRadius * Vec3(std::sin(azimuth) * std::cos(elevation),
                                      std::sin(elevation),
                                      std::cos(azimuth) * std::cos(elevation));
  cam.up = Vec3(0, 1, 0);
  cam.azimuth = azimuth;
  cam.elevation = elevation;
  cam.radius = kCameraRadius;
  return cam;
}

Camera ring_camera(int index, int count, double elevation, int width, int height) {
  if (count < 1) throw Error(ErrorCode::bad_value, "ring camera count must be >= 1");
  double azimuth = 2 * M_PI * index / count;
  if (azimuth > M_PI) azimuth -= 2 * M_PI;
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.focal_px = default_focal_px(width);
  cam.look_at = Vec3(0, 0, 0);
  cam.position = kCameraRadius * Vec3(std::sin(azimuth) * std::cos(elevation),
                                      std::sin(elevation),
                                      std::cos(azimuth) * std::cos(elevation));
  cam.up = Vec3(0, 1, 0);
  cam.azimuth = azimuth;
  cam.elevation = elevation;
  cam.radius = kCameraRadius;
  return cam;
}

std::string render_dataset(const SceneParts& scene, const DatasetOptions& options,
                           const std::string& out_dir) {
  if (options.n_views < 1) throw Error(ErrorCode::bad_value, "n_views must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::file_io, "cannot create " + out_dir);

  Vec3 background(1, 1, 1);
  std::vector<ManifestEntry> entries;
  char name[64];

  for (int i = 0; i < options.n_views; ++i) {
    Camera cam;
    if (i == 0) {
      cam = ring_camera(0, options.n_views, options.ring_elevation, options.width,
                        options.height);
    } else if (options.random_views) {
      cam = sample_camera(options.seed, static_cast<uint64_t>(i), options.width, options.height);
    } else {
      cam = ring_camera(i, options.n_views, options.ring_elevation, options.width,
                        options.height);
    }

    RenderedView view = render(scene.full, cam, background);
    RenderedView hair = render(scene.hair, cam, background);
    ImageBuffer mask(cam.width, cam.height, 1);
    for (size_t px = 0; px < mask.data.size(); ++px)
      mask.data[px] = hair.alpha.data[px] > 0.5 ? 1.0 : 0.0;

    std::snprintf(name, sizeof(name), "view_%03d.png", i);
    std::string image_rel = name;
    write_png(view.rgb, out_dir + "/" + image_rel);
    std::snprintf(name, sizeof(name), "mask_%03d.png", i);
    write_png(mask, out_dir + "/" + name);
    std::snprintf(name, sizeof(name), "cam_%03d.txt", i);
    std::string cam_rel = name;
    save_camera_txt(cam, out_dir + "/" + cam_rel);
    entries.push_back({i, image_rel, cam_rel});
  }

  save_cloud(scene.full, out_dir + "/gt_full.gs");
  save_cloud(scene.hair, out_dir + "/gt_hair.gs");
  std::string manifest = out_dir + "/manifest.tsv";
  save_manifest(entries, manifest);
  return manifest;
}

}  // namespace gslift
