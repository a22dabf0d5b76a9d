#include "gslift/oracles.hpp"

#include <cmath>
#include <cstring>

#include "gslift/error.hpp"
#include "gslift/image_ops.hpp"
#include "gslift/render.hpp"
#include "gslift/rng.hpp"

namespace gslift {

namespace {

uint64_t hash_doubles(uint64_t h, const double* vals, size_t n) {
  return hash_combine(h, hash_bytes(vals, n * sizeof(double)));
}

// Move the camera on its viewing sphere by normal angular offsets.
Camera jitter_camera(const Camera& base, double sigma, Rng& rng) {
  if (sigma <= 0) return base;
  Vec3 off = base.position - base.look_at;
  double r = off.norm();
  double azim = std::atan2(off.x(), off.z());
  double elev = std::asin(std::clamp(off.y() / r, -1.0, 1.0));
  azim += sigma * rng.normal();
  elev += sigma * rng.normal();
  elev = std::clamp(elev, -1.55, 1.55);
  Camera out = base;
  out.position =
      base.look_at + Vec3(r * std::cos(elev) * std::sin(azim), r * std::sin(elev),
                          r * std::cos(elev) * std::cos(azim));
  return out;
}

}  // namespace

GroundTruthSynthesizer::GroundTruthSynthesizer(GaussianCloud scene, Camera reference_camera,
                                               CorruptionParams corruption, NoiseSchedule schedule,
                                               Vec3 background)
    : scene_(std::move(scene)),
      ref_cam_(reference_camera),
      corruption_(corruption),
      schedule_(std::move(schedule)),
      background_(background) {
  ref_cam_.validate();
}

ImageBuffer GroundTruthSynthesizer::synthesize(const ImageBuffer& input, double gamma,
                                               const ImageBuffer& condition,
                                               const RelativePose& rel_pose) const {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw Error(ErrorCode::bad_value, "gamma must be in (0, 1]");
  if (input.width != ref_cam_.width || input.height != ref_cam_.height || input.channels != 3)
    throw Error(ErrorCode::dimension_mismatch, "synthesize input shape");

  Camera posed = rel_pose.apply_to(ref_cam_);
  posed.validate();

  double strength = 1.0 - gamma;
  uint64_t h = corruption_.seed;
  h = hash_combine(h, hash_bytes(input.data.data(), input.data.size() * sizeof(double)));
  if (!condition.data.empty())
    h = hash_combine(h, hash_bytes(condition.data.data(), condition.data.size() * sizeof(double)));
  h = hash_doubles(h, &gamma, 1);
  double pose_vals[12];
  std::memcpy(pose_vals, rel_pose.rotation.data(), 9 * sizeof(double));
  std::memcpy(pose_vals + 9, rel_pose.translation.data(), 3 * sizeof(double));
  h = hash_doubles(h, pose_vals, 12);
  Rng rng(h);

  Camera query = jitter_camera(posed, corruption_.jitter_sigma * strength, rng);
  ImageBuffer rgb = render(scene_, query, background_).rgb;
  double sigma = corruption_.blur_sigma * strength;
  if (sigma > 0) rgb = gaussian_blur(rgb, sigma);
  return rgb;
}

ImageBuffer GroundTruthSynthesizer::predict_noise(const ImageBuffer& x_t, int t,
                                                  const ImageBuffer& condition,
                                                  const RelativePose& rel_pose) const {
  if (t < 1 || t > schedule_.T)
    throw Error(ErrorCode::out_of_range, "timestep outside schedule");
  double ab = schedule_.alpha_bar_at(t);
  if (ab >= 1.0) throw Error(ErrorCode::out_of_range, "alpha_bar 1 makes noise undefined");
  double sa = std::sqrt(ab);
  double sb = std::sqrt(1.0 - ab);
  ImageBuffer x0 = synthesize(x_t, sa, condition, rel_pose);
  ImageBuffer out(x_t.width, x_t.height, x_t.channels);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = (x_t.data[i] - sa * x0.data[i]) / sb;
  return out;
}

IdealEnhancer::IdealEnhancer(GaussianCloud scene, Vec3 background)
    : scene_(std::move(scene)), background_(background) {}

ImageBuffer IdealEnhancer::enhance(const ImageBuffer& image, const EnhanceContext& context) const {
  if (!context.camera)
    throw Error(ErrorCode::missing_input, "enhancer needs the rendering camera");
  const Camera& cam = *context.camera;
  if (image.width != cam.width || image.height != cam.height || image.channels != 3)
    throw Error(ErrorCode::dimension_mismatch, "enhance input shape");
  return render(scene_, cam, background_).rgb;
}

ImageBuffer BlindEnhancer::enhance(const ImageBuffer& image, const EnhanceContext&) const {
  if (image.channels != 3) throw Error(ErrorCode::dimension_mismatch, "enhance wants 3 channels");
  return unsharp_mask(image, strength_, sigma_);
}

}  // namespace gslift
