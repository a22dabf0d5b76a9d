#pragma once

#include <cstdint>

#include "gslift/oracle.hpp"
#include "gslift/schedule.hpp"
#include "gslift/types.hpp"

namespace gslift {

inline Vec3 default_background() { return Vec3(1.0, 1.0, 1.0); }

struct CorruptionParams {
  double blur_sigma = 1.5;     // px, scaled by (1 - gamma) per query
  double jitter_sigma = 0.015; // radians of per-call camera perturbation
  uint64_t seed = 0;
};

// Prior stand-in backed by a hidden ground-truth scene. synthesize renders
// the true scene from reference_camera composed with the requested pose;
// corruption (pose jitter + blur) scales with (1 - gamma), emulating a prior
// that defers to its input more as gamma grows. Per-call randomness is a pure
// hash of (seed, inputs), so outputs are deterministic yet resampled whenever
// any input changes.
class GroundTruthSynthesizer : public SynthesizerOracle {
 public:
  GroundTruthSynthesizer(GaussianCloud scene, Camera reference_camera,
                         CorruptionParams corruption = {},
                         NoiseSchedule schedule = NoiseSchedule(),
                         Vec3 background = default_background());

  ImageBuffer synthesize(const ImageBuffer& input, double gamma, const ImageBuffer& condition,
                         const RelativePose& rel_pose) const override;

  // eps_hat = (x_t - sqrt(ab) x0_hat) / sqrt(1 - ab), x0_hat synthesized at
  // gamma = sqrt(ab).
  ImageBuffer predict_noise(const ImageBuffer& x_t, int t, const ImageBuffer& condition,
                            const RelativePose& rel_pose) const override;

  const Camera& reference_camera() const { return ref_cam_; }
  const NoiseSchedule& schedule() const { return schedule_; }

 private:
  GaussianCloud scene_;
  Camera ref_cam_;
  CorruptionParams corruption_;
  NoiseSchedule schedule_;
  Vec3 background_;
};

// Detail prior with full scene knowledge: returns the true render for the
// camera in the context, regardless of the input image content.
class IdealEnhancer : public EnhancerOracle {
 public:
  IdealEnhancer(GaussianCloud scene, Vec3 background = default_background());
  ImageBuffer enhance(const ImageBuffer& image, const EnhanceContext& context) const override;

 private:
  GaussianCloud scene_;
  Vec3 background_;
};

// Camera-free fallback: unsharp masking.
class BlindEnhancer : public EnhancerOracle {
 public:
  explicit BlindEnhancer(double strength = 1.0, double sigma = 1.5)
      : strength_(strength), sigma_(sigma) {}
  ImageBuffer enhance(const ImageBuffer& image, const EnhanceContext& context) const override;

 private:
  double strength_;
  double sigma_;
};

}  // namespace gslift
