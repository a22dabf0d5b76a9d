#include <cmath>

#include "doctest.h"
#include "gslift/error.hpp"
#include "gslift/image_ops.hpp"
#include "gslift/losses.hpp"
#include "gslift/oracles.hpp"
#include "gslift/render.hpp"
#include "gslift/rng.hpp"
#include "gslift/schedule.hpp"

using namespace gslift;

namespace {

GaussianCloud demo_scene() {
  Rng rng(77);
  GaussianCloud cloud;
  cloud.prims.resize(6);
  for (size_t k = 0; k < cloud.prims.size(); ++k) {
    GaussianPrimitive& g = cloud.prims[k];
    g.center = {static_cast<float>(rng.uniform(-0.1, 0.1)),
                static_cast<float>(rng.uniform(-0.1, 0.1)),
                static_cast<float>(-0.12 + 0.04 * static_cast<double>(k))};
    for (int i = 0; i < 3; ++i) g.log_scale[i] = static_cast<float>(rng.uniform(-2.8, -2.3));
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    for (int i = 0; i < 4; ++i) g.rotation[i] = static_cast<float>(q[i]);
    g.opacity_logit = 0.5f;
    for (int i = 0; i < 3; ++i) g.color[i] = static_cast<float>(rng.uniform(0.1, 0.9));
  }
  cloud.reset_stats();
  return cloud;
}

Camera demo_camera() {
  Camera cam;
  cam.width = 48;
  cam.height = 48;
  cam.focal_px = 66.0;
  cam.position = Vec3(0, 0, 1.05);
  cam.look_at = Vec3::Zero();
  cam.up = Vec3(0, 1, 0);
  return cam;
}

RelativePose yaw_pose(double angle) {
  Camera ref = demo_camera();
  Camera other = ref;
  other.position = Vec3(1.05 * std::sin(angle), 0.0, 1.05 * std::cos(angle));
  return RelativePose::between(ref, other);
}

}  // namespace

TEST_CASE("synthesize with zero corruption is the exact render") {
  GaussianCloud scene = demo_scene();
  Camera ref = demo_camera();
  GroundTruthSynthesizer oracle(scene, ref, {0.0, 0.0, 9});
  ImageBuffer input(48, 48, 3, 0.25);
  ImageBuffer condition(48, 48, 3, 0.0);

  SUBCASE("identity pose hits the reference camera") {
    ImageBuffer out = oracle.synthesize(input, 1.0, condition, RelativePose());
    ImageBuffer direct = render(scene, ref, default_background()).rgb;
    CHECK(out.data == direct.data);
  }

  SUBCASE("relative pose reaches the posed camera") {
    RelativePose pose = yaw_pose(0.4);
    ImageBuffer out = oracle.synthesize(input, 1.0, condition, pose);
    ImageBuffer direct = render(scene, pose.apply_to(ref), default_background()).rgb;
    CHECK(out.data == direct.data);
    // gamma has nothing to scale when corruption is zero
    ImageBuffer half = oracle.synthesize(input, 0.5, condition, pose);
    CHECK(half.data == out.data);
  }

  SUBCASE("gamma bounds enforced") {
    CHECK_THROWS_AS(oracle.synthesize(input, 0.0, condition, RelativePose()), Error);
    CHECK_THROWS_AS(oracle.synthesize(input, 1.0001, condition, RelativePose()), Error);
  }
}

TEST_CASE("corrupted synthesis is deterministic per (inputs, seed) and varies across seeds") {
  GaussianCloud scene = demo_scene();
  Camera ref = demo_camera();
  ImageBuffer input(48, 48, 3, 0.25);
  ImageBuffer condition(48, 48, 3, 0.0);
  RelativePose pose = yaw_pose(0.3);

  GroundTruthSynthesizer a(scene, ref, {0.0, 0.02, 1});
  ImageBuffer out1 = a.synthesize(input, 0.5, condition, pose);
  ImageBuffer out2 = a.synthesize(input, 0.5, condition, pose);
  CHECK(out1.data == out2.data);

  GroundTruthSynthesizer b(scene, ref, {0.0, 0.02, 2});
  ImageBuffer outb = b.synthesize(input, 0.5, condition, pose);
  CHECK(out1.data != outb.data);

  // different input image resamples the jitter
  ImageBuffer input2(48, 48, 3, 0.35);
  ImageBuffer outc = a.synthesize(input2, 0.5, condition, pose);
  CHECK(out1.data != outc.data);
}

TEST_CASE("jitter averages toward the unjittered render as seeds accumulate") {
  GaussianCloud scene = demo_scene();
  Camera ref = demo_camera();
  ImageBuffer input(48, 48, 3, 0.25);
  ImageBuffer condition(48, 48, 3, 0.0);
  RelativePose pose;
  ImageBuffer clean = render(scene, ref, default_background()).rgb;

  auto mean_deviation = [&](int n_seeds) {
    ImageBuffer acc(48, 48, 3, 0.0);
    for (int s = 1; s <= n_seeds; ++s) {
      GroundTruthSynthesizer oracle(scene, ref, {0.0, 0.03, static_cast<uint64_t>(s)});
      ImageBuffer out = oracle.synthesize(input, 0.5, condition, pose);
      for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += out.data[i];
    }
    double dev = 0;
    for (size_t i = 0; i < acc.data.size(); ++i)
      dev += std::abs(acc.data[i] / n_seeds - clean.data[i]);
    return dev / static_cast<double>(acc.data.size());
  };

  double d16 = mean_deviation(16);
  double d64 = mean_deviation(64);
  CHECK(d64 < d16);
}

TEST_CASE("predict_noise inverts forward diffusion when corruption is zero") {
  GaussianCloud scene = demo_scene();
  Camera ref = demo_camera();
  GroundTruthSynthesizer oracle(scene, ref, {0.0, 0.0, 0});
  ImageBuffer condition(48, 48, 3, 0.0);
  ImageBuffer x0 = render(scene, ref, default_background()).rgb;

  Rng rng(123);
  ImageBuffer eps(48, 48, 3);
  for (double& v : eps.data) v = rng.normal();

  for (int t : {37, 100, 500, 900}) {
    ImageBuffer x_t = forward_diffuse(x0, t, eps, oracle.schedule());
    ImageBuffer eps_hat = oracle.predict_noise(x_t, t, condition, RelativePose());
    double max_err = 0;
    for (size_t i = 0; i < eps.data.size(); ++i)
      max_err = std::max(max_err, std::abs(eps_hat.data[i] - eps.data[i]));
    CAPTURE(t);
    CHECK(max_err < 1e-5);
  }
}

TEST_CASE("predict_noise residual identity for non-ground-truth inputs") {
  GaussianCloud scene = demo_scene();
  Camera ref = demo_camera();
  GroundTruthSynthesizer oracle(scene, ref, {0.0, 0.0, 0});
  ImageBuffer condition(48, 48, 3, 0.0);
  ImageBuffer x0_true(48, 48, 3);
  Rng rng(9);
  for (double& v : x0_true.data) v = rng.uniform(0.0, 1.0);
  ImageBuffer eps(48, 48, 3);
  for (double& v : eps.data) v = rng.normal();

  int t = 400;
  double ab = oracle.schedule().alpha_bar_at(t);
  ImageBuffer x_t = forward_diffuse(x0_true, t, eps, oracle.schedule());
  ImageBuffer eps_hat = oracle.predict_noise(x_t, t, condition, RelativePose());
  ImageBuffer x0_hat = render(scene, ref, default_background()).rgb;  // zero corruption target

  double scale = std::sqrt(ab) / std::sqrt(1.0 - ab);
  for (size_t i = 0; i < eps.data.size(); ++i) {
    double lhs = eps_hat.data[i] - eps.data[i];
    double rhs = scale * (x0_true.data[i] - x0_hat.data[i]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("predict_noise rejects degenerate timesteps") {
  GaussianCloud scene = demo_scene();
  Camera ref = demo_camera();
  ImageBuffer condition(48, 48, 3, 0.0);
  ImageBuffer x(48, 48, 3, 0.5);

  GroundTruthSynthesizer oracle(scene, ref, {0.0, 0.0, 0});
  CHECK_THROWS_AS(oracle.predict_noise(x, 0, condition, RelativePose()), Error);
  CHECK_THROWS_AS(oracle.predict_noise(x, 1001, condition, RelativePose()), Error);

  GroundTruthSynthesizer flat(scene, ref, {0.0, 0.0, 0}, NoiseSchedule(10, 0.0, 0.0));
  CHECK_THROWS_AS(flat.predict_noise(x, 5, condition, RelativePose()), Error);
}

TEST_CASE("ideal enhancer returns the true render for the context camera") {
  GaussianCloud scene = demo_scene();
  Camera cam = demo_camera();
  IdealEnhancer enhancer(scene);
  ImageBuffer gt = render(scene, cam, default_background()).rgb;

  EnhanceContext ctx;
  ctx.camera = cam;

  ImageBuffer out = enhancer.enhance(gt, ctx);
  CHECK(out.data == gt.data);

  SUBCASE("output ignores input corruption") {
    ImageBuffer blurred = gaussian_blur(gt, 2.0);
    ImageBuffer noisy = gt;
    Rng rng(3);
    for (double& v : noisy.data) v = clamp01(v + rng.uniform(-0.2, 0.2));
    ImageBuffer a = enhancer.enhance(blurred, ctx);
    ImageBuffer b = enhancer.enhance(noisy, ctx);
    CHECK(a.data == b.data);
    CHECK(a.data == gt.data);
    CHECK(perceptual(a, gt).loss == 0.0);
  }

  SUBCASE("missing camera rejected") {
    EnhanceContext empty;
    CHECK_THROWS_AS(enhancer.enhance(gt, empty), Error);
  }
}

TEST_CASE("blind enhancer is an unsharp mask") {
  SUBCASE("constant image unchanged") {
    ImageBuffer flat(12, 10, 3, 0.42);
    BlindEnhancer e;
    ImageBuffer out = e.enhance(flat, {});
    for (double v : out.data) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));
  }

  SUBCASE("zero strength is the identity") {
    ImageBuffer img(9, 9, 3);
    Rng rng(4);
    for (double& v : img.data) v = rng.uniform(0.0, 1.0);
    BlindEnhancer e(0.0, 1.5);
    ImageBuffer out = e.enhance(img, {});
    CHECK(out.data == img.data);
  }

  SUBCASE("step edge overshoots on both sides, matches direct convolution") {
    ImageBuffer img(16, 16, 3);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = x < 8 ? 0.2 : 0.8;

    double sigma = 1.5, strength = 1.0;
    BlindEnhancer e(strength, sigma);
    ImageBuffer out = e.enhance(img, {});

    // brute-force separable Gaussian with replicate borders
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(2 * radius + 1);
    double norm = 0;
    for (int k = -radius; k <= radius; ++k) {
      w[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
      norm += w[k + radius];
    }
    for (double& v : w) v /= norm;
    auto clampc = [](int v, int hi) { return std::min(std::max(v, 0), hi); };
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        for (int c = 0; c < 3; ++c) {
          double blur = 0;
          for (int ky = -radius; ky <= radius; ++ky)
            for (int kx = -radius; kx <= radius; ++kx)
              blur += w[ky + radius] * w[kx + radius] *
                      img.at(clampc(x + kx, 15), clampc(y + ky, 15), c);
          double expect = clamp01(img.at(x, y, c) + strength * (img.at(x, y, c) - blur));
          CHECK(out.at(x, y, c) == doctest::Approx(expect).epsilon(1e-12));
        }

    // dark side dips, bright side overshoots
    CHECK(out.at(7, 8, 0) < img.at(7, 8, 0));
    CHECK(out.at(8, 8, 0) > img.at(8, 8, 0));
  }

  SUBCASE("single channel rejected") {
    ImageBuffer gray(8, 8, 1, 0.5);
    BlindEnhancer e;
    CHECK_THROWS_AS(e.enhance(gray, {}), Error);
  }
}
