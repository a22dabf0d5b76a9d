#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gslift/cloud_io.hpp"
#include "gslift/image_io.hpp"
#include "gslift/render.hpp"
#include "gslift/rng.hpp"
#include "gslift/scenegen.hpp"
#include "gslift/text_io.hpp"

using namespace gslift;

namespace {

bool prims_equal(const GaussianCloud& a, const GaussianCloud& b) {
  if (a.size() != b.size()) return false;
  return a.prims.empty() ||
         std::memcmp(a.prims.data(), b.prims.data(),
                     a.prims.size() * sizeof(GaussianPrimitive)) == 0;
}

double wrap_angle(double a) {
  while (a > M_PI) a -= 2 * M_PI;
  while (a < -M_PI) a += 2 * M_PI;
  return a;
}

std::string fresh_dir(const char* tag) {
  std::filesystem::path d =
      std::filesystem::temp_directory_path() / ("gslift_sg_" + std::string(tag));
  std::filesystem::remove_all(d);
  return d.string();
}

}  // namespace

TEST_CASE("scene generation basics") {
  SceneSpec spec;
  spec.seed = 3;
  spec.strand_count = 1;
  spec.gaussians_per_strand = 10;

  SUBCASE("primitive counts per part") {
    SceneParts parts = generate_scene_parts(spec);
    CHECK(parts.hair.size() == 10);
    CHECK(parts.body.size() > 0);
    CHECK(parts.full.size() == parts.hair.size() + parts.body.size());
    // Hair occupies the front of the concatenation.
    CHECK(std::memcmp(parts.full.prims.data(), parts.hair.prims.data(),
                      parts.hair.size() * sizeof(GaussianPrimitive)) == 0);
  }

  SUBCASE("seeded determinism per style") {
    for (HairStyle style : {HairStyle::straight, HairStyle::wavy, HairStyle::bun,
                            HairStyle::braid}) {
      SceneSpec s = spec;
      s.style = style;
      s.strand_count = 6;
      CAPTURE(style_name(style));
      CHECK(prims_equal(generate_scene(s), generate_scene(s)));
      SceneSpec other = s;
      other.seed = 4;
      CHECK(!prims_equal(generate_scene(s), generate_scene(other)));
    }
  }

  SUBCASE("strand roots hug the upper head surface") {
    for (HairStyle style : {HairStyle::straight, HairStyle::wavy, HairStyle::bun,
                            HairStyle::braid}) {
      SceneSpec s = spec;
      s.style = style;
      s.strand_count = 12;
      s.gaussians_per_strand = 16;
      SceneParts parts = generate_scene_parts(s);
      for (int k = 0; k < s.strand_count; ++k) {
        Vec3 first = parts.hair.prims[k * s.gaussians_per_strand].center_v();
        CAPTURE(style_name(style));
        CAPTURE(k);
        CHECK((first - s.head_center).norm() < 1.3 * s.head_radius);
      }
    }
  }

  SUBCASE("validation rejects bad specs") {
    SceneSpec bad = spec;
    bad.strand_count = 0;
    CHECK_THROWS_AS(generate_scene(bad), Error);
    bad = spec;
    bad.head_radius = 0.0;
    CHECK_THROWS_AS(generate_scene(bad), Error);
    CHECK_THROWS_AS(style_from_string("curly"), Error);
    CHECK(style_from_string("braid") == HairStyle::braid);
  }
}

TEST_CASE("braid helices interleave at 2pi/3") {
  SceneSpec spec;
  spec.seed = 11;
  spec.style = HairStyle::braid;
  spec.strand_count = 9;
  spec.gaussians_per_strand = 30;
  SceneParts parts = generate_scene_parts(spec);
  BraidFrame f = braid_frame(spec);

  // Phase of a strand's center at segment j, measured around the braid axis.
  auto phase_at = [&](int strand, int j) {
    Vec3 p = parts.hair.prims[strand * spec.gaussians_per_strand + j].center_v();
    Vec3 q = p - f.origin;
    q -= f.axis * f.axis.dot(q);
    return std::atan2(q.dot(f.e2), q.dot(f.e1));
  };

  // Well inside the helix portion (the first fifth blends from the root).
  for (int j : {18, 22, 26}) {
    for (int base = 0; base < 3; ++base) {
      double p0 = phase_at(base, j);
      double p1 = phase_at(base + 3, j);  // same group, jitter apart only
      CHECK(std::abs(wrap_angle(p1 - p0)) < 0.2);
    }
    double g0 = phase_at(0, j), g1 = phase_at(1, j), g2 = phase_at(2, j);
    CHECK(wrap_angle(g1 - g0) == doctest::Approx(2 * M_PI / 3).epsilon(0.08));
    CHECK(wrap_angle(g2 - g1) == doctest::Approx(2 * M_PI / 3).epsilon(0.08));
    CHECK(std::abs(wrap_angle(g2 - g0)) == doctest::Approx(2 * M_PI / 3).epsilon(0.08));
  }
}

TEST_CASE("hemisphere camera sampling") {
  SUBCASE("radius, elevation and uniformity") {
    double sum_y = 0;
    int n = 10000;
    for (int i = 0; i < n; ++i) {
      Camera cam = sample_camera(77, i);
      CHECK(cam.position.norm() == doctest::Approx(1.05).epsilon(1e-9));
      CHECK(cam.elevation >= 0.0);
      CHECK(cam.width == 512);
      CHECK(cam.focal_px == doctest::Approx(50.0 / 36.0 * 512));
      sum_y += cam.position.y();
    }
    // Uniform-area hemisphere: mean height radius/2, sd radius/sqrt(12n).
    double mean = sum_y / n;
    double limit = 3.0 * 1.05 / std::sqrt(12.0 * n);
    CHECK(std::abs(mean - 1.05 / 2) < limit);
  }

  SUBCASE("distinct seeds move the camera") {
    Camera a = sample_camera(1, 0), b = sample_camera(2, 0);
    CHECK((a.position - b.position).norm() > 1e-6);
    Camera a2 = sample_camera(1, 0);
    CHECK((a.position - a2.position).norm() == 0.0);
  }

  SUBCASE("ring cameras space azimuths evenly, frontal first") {
    int count = 180;
    Camera first = ring_camera(0, count);
    CHECK(first.azimuth == 0.0);
    CHECK(first.position.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(first.position.z() > 0.0);
    for (int i = 0; i < count; ++i) {
      Camera cam = ring_camera(i, count);
      double expected = wrap_angle(2 * M_PI * i / count);
      CHECK(wrap_angle(cam.azimuth - expected) == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(cam.elevation == doctest::Approx(0.35));
      CHECK(cam.position.norm() == doctest::Approx(1.05).epsilon(1e-9));
    }
  }
}

TEST_CASE("dataset rendering") {
  SceneSpec spec;
  spec.seed = 5;
  spec.strand_count = 8;
  spec.gaussians_per_strand = 12;
  SceneParts parts = generate_scene_parts(spec);

  DatasetOptions opt;
  opt.n_views = 5;
  opt.width = 48;
  opt.height = 48;

  SUBCASE("files, manifest, and re-render fidelity") {
    std::string dir = fresh_dir("files");
    std::string manifest_path = render_dataset(parts, opt, dir);
    std::vector<ManifestEntry> entries = load_manifest(manifest_path);
    REQUIRE(entries.size() == 5);
    CHECK(entries[0].index == 0);

    GaussianCloud full = load_cloud(dir + "/gt_full.gs");
    CHECK(prims_equal(full, parts.full));
    GaussianCloud hair = load_cloud(dir + "/gt_hair.gs");
    CHECK(prims_equal(hair, parts.hair));

    for (const ManifestEntry& e : entries) {
      Camera cam = load_camera_txt(e.camera_path);
      ImageBuffer stored = read_png(e.image_path);
      RenderedView again = render(full, cam, Vec3(1, 1, 1));
      REQUIRE(stored.same_shape(again.rgb));
      for (size_t i = 0; i < stored.data.size(); ++i) {
        double q = std::round(clamp01(again.rgb.data[i]) * 255.0) / 255.0;
        if (std::abs(stored.data[i] - q) > 1e-12) {
          CAPTURE(e.index);
          REQUIRE(stored.data[i] == q);
        }
      }
    }

    // View 0 is the frontal reference: its camera sits on +z.
    Camera ref = load_camera_txt(entries[0].camera_path);
    CHECK(ref.azimuth == 0.0);
    CHECK(ref.position.z() > 0.0);
  }

  SUBCASE("masks threshold the hair alpha") {
    std::string dir = fresh_dir("masks");
    render_dataset(parts, opt, dir);
    ImageBuffer mask = read_png(dir + "/mask_000.png");
    Camera cam = load_camera_txt(dir + "/cam_000.txt");
    RenderedView hair = render(parts.hair, cam, Vec3(1, 1, 1));
    int on = 0;
    for (size_t i = 0; i < mask.data.size(); ++i) {
      double expect = hair.alpha.data[i] > 0.5 ? 1.0 : 0.0;
      CHECK(mask.data[i] == expect);
      on += mask.data[i] > 0.5;
    }
    CHECK(on > 0);        // some hair visible
    CHECK(on < 48 * 48);  // not everything
  }

  SUBCASE("same options reproduce byte-identical datasets") {
    std::string d1 = fresh_dir("rep1"), d2 = fresh_dir("rep2");
    render_dataset(parts, opt, d1);
    render_dataset(parts, opt, d2);
    for (const char* f : {"view_002.png", "mask_002.png", "gt_full.gs"}) {
      ImageBuffer x;  // compare raw bytes via file read
      std::ifstream a(d1 + "/" + f, std::ios::binary), b(d2 + "/" + f, std::ios::binary);
      std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
      std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
      CAPTURE(f);
      CHECK(sa == sb);
      CHECK(!sa.empty());
    }
  }

  SUBCASE("random view mode keeps the frontal reference") {
    DatasetOptions ropt = opt;
    ropt.random_views = true;
    ropt.seed = 9;
    std::string dir = fresh_dir("rand");
    std::vector<ManifestEntry> entries = load_manifest(render_dataset(parts, ropt, dir));
    Camera ref = load_camera_txt(entries[0].camera_path);
    CHECK(ref.azimuth == 0.0);
    Camera c1 = load_camera_txt(entries[1].camera_path);
    Camera c2 = load_camera_txt(entries[2].camera_path);
    CHECK((c1.position - c2.position).norm() > 1e-6);
    CHECK(c1.position.norm() == doctest::Approx(1.05).epsilon(1e-9));
  }
}

TEST_CASE("generated scenes render cleanly from sampled cameras") {
  for (HairStyle style : {HairStyle::straight, HairStyle::braid}) {
    SceneSpec spec;
    spec.seed = 13;
    spec.style = style;
    spec.strand_count = 10;
    spec.gaussians_per_strand = 14;
    GaussianCloud cloud = generate_scene(spec);
    for (uint64_t i = 0; i < 4; ++i) {
      Camera cam = sample_camera(21, i, 40, 40);
      RenderedView v = render(cloud, cam, Vec3(1, 1, 1));
      for (double x : v.rgb.data) {
        REQUIRE(std::isfinite(x));
      }
      for (double x : v.alpha.data) REQUIRE(std::isfinite(x));
    }
  }
}
