#pragma once

#include <optional>

#include "gslift/types.hpp"

namespace gslift {

// Novel-view prior: denoise toward a view of the subject, and predict the
// noise component of a diffused image. Implementations must be deterministic
// given (inputs, seed) and hold no mutable state across calls.
class SynthesizerOracle {
 public:
  virtual ~SynthesizerOracle() = default;
  virtual ImageBuffer synthesize(const ImageBuffer& input, double gamma,
                                 const ImageBuffer& condition,
                                 const RelativePose& rel_pose) const = 0;
  virtual ImageBuffer predict_noise(const ImageBuffer& x_t, int t, const ImageBuffer& condition,
                                    const RelativePose& rel_pose) const = 0;
};

struct EnhanceContext {
  std::optional<Camera> camera;  // camera that rendered the input, when known
};

// Detail prior: sharpen a rendered view. Output dimensions equal input.
class EnhancerOracle {
 public:
  virtual ~EnhancerOracle() = default;
  virtual ImageBuffer enhance(const ImageBuffer& image, const EnhanceContext& context) const = 0;
};

}  // namespace gslift
