#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gslift/error.hpp"

namespace gslift {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// One splat. Storage is f32 to match the serialized layout bit-exactly;
// all math is done in double after widening.
struct GaussianPrimitive {
  std::array<float, 3> center{0.f, 0.f, 0.f};
  std::array<float, 3> log_scale{0.f, 0.f, 0.f};
  std::array<float, 4> rotation{1.f, 0.f, 0.f, 0.f};  // w x y z
  float opacity_logit = 0.f;
  std::array<float, 3> color{0.f, 0.f, 0.f};

  Vec3 center_v() const { return Vec3(center[0], center[1], center[2]); }
  Vec3 log_scale_v() const { return Vec3(log_scale[0], log_scale[1], log_scale[2]); }
  Vec4 rotation_v() const { return Vec4(rotation[0], rotation[1], rotation[2], rotation[3]); }
  Vec3 color_v() const { return Vec3(color[0], color[1], color[2]); }
  double opacity() const { return sigmoid(opacity_logit); }
};

// Cloud plus densification statistics. Statistics are not serialized and
// reset whenever the primitive list changes shape.
struct GaussianCloud {
  std::vector<GaussianPrimitive> prims;

  std::vector<double> pos_grad_accum;  // sum of screen-scaled 2D grad magnitude
  std::vector<uint32_t> grad_count;
  std::vector<double> grad_dir_accum;  // 3n, world-space positional grad sum

  size_t size() const { return prims.size(); }

  void reset_stats() {
    pos_grad_accum.assign(prims.size(), 0.0);
    grad_count.assign(prims.size(), 0);
    grad_dir_accum.assign(prims.size() * 3, 0.0);
  }

  void ensure_stats() {
    if (pos_grad_accum.size() != prims.size()) reset_stats();
  }
};

// Pinhole camera, look-at parameterization. azimuth/elevation/radius record
// the hemisphere coordinates the camera was sampled at (diagnostic for
// jitter and pose files; rendering uses only the geometric fields).
struct Camera {
  int width = 0;
  int height = 0;
  double focal_px = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3(0, 1, 0);
  double azimuth = 0.0;
  double elevation = 0.0;
  double radius = 0.0;

  // Rows are camera x (image right), y (image down), z (forward).
  Mat3 world_to_cam() const {
    Vec3 fwd = look_at - position;
    double n = fwd.norm();
    if (!(n > 1e-12)) throw Error(ErrorCode::out_of_range, "camera position equals look_at");
    fwd /= n;
    Vec3 x = fwd.cross(up);
    double xn = x.norm();
    if (!(xn > 1e-9)) throw Error(ErrorCode::out_of_range, "camera up collinear with view direction");
    x /= xn;
    Vec3 y = fwd.cross(x);
    Mat3 w;
    w.row(0) = x.transpose();
    w.row(1) = y.transpose();
    w.row(2) = fwd.transpose();
    return w;
  }

  void validate() const {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::dimension_mismatch, "camera image size");
    if (!(focal_px > 0)) throw Error(ErrorCode::out_of_range, "camera focal_px");
    (void)world_to_cam();
  }
};

// Rigid pose of a camera relative to a reference camera, world->cam frames:
// W_target = R * W_ref, t_target = R * t_ref + T with t = -W * position.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RelativePose between(const Camera& ref, const Camera& target) {
    Mat3 wr = ref.world_to_cam();
    Mat3 wt = target.world_to_cam();
    RelativePose rp;
    rp.rotation = wt * wr.transpose();
    Vec3 tr = -(wr * ref.position);
    Vec3 tt = -(wt * target.position);
    rp.translation = tt - rp.rotation * tr;
    return rp;
  }

  // Reconstructs the target camera, inheriting the reference intrinsics.
  Camera apply_to(const Camera& ref) const {
    Mat3 wr = ref.world_to_cam();
    Mat3 wt = rotation * wr;
    Vec3 tr = -(wr * ref.position);
    Vec3 tt = rotation * tr + translation;
    Vec3 pos = -(wt.transpose() * tt);
    Camera out = ref;
    out.position = pos;
    out.up = -wt.row(1).transpose();
    double d = (ref.look_at - ref.position).norm();
    // Keep look_at at the reference viewing distance so hemisphere recovery
    // of the pose (for jitter) stays stable.
    out.look_at = pos + wt.row(2).transpose() * (d > 1e-9 ? d : 1.0);
    return out;
  }

  bool is_identity(double tol = 1e-12) const {
    return (rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           translation.cwiseAbs().maxCoeff() <= tol;
  }
};

// Planar image, row-major interleaved, double storage. Values are [0,1] for
// images; difference and gradient buffers may leave that range.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || c <= 0)
      throw Error(ErrorCode::dimension_mismatch, "image buffer shape");
  }

  double& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  size_t count() const { return data.size(); }
  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

inline void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::dimension_mismatch, what);
}

struct RenderedView {
  ImageBuffer rgb;    // 3 channels
  ImageBuffer alpha;  // 1 channel, 1 - final transmittance
  ImageBuffer depth;  // 1 channel, alpha-weighted expected splat depth
};

// Render diagnostics; counters accumulate per call.
struct RenderStats {
  size_t visible = 0;
  size_t culled_near = 0;
  size_t culled_offscreen = 0;
  size_t skipped_singular = 0;
  size_t zero_quaternion = 0;
};

struct SimilarityTransform2D {
  double scale = 1.0;
  double rotation_rad = 0.0;
  Vec2 translation = Vec2::Zero();

  Vec2 apply(const Vec2& p) const {
    double c = std::cos(rotation_rad), s = std::sin(rotation_rad);
    return Vec2(scale * (c * p.x() - s * p.y()) + translation.x(),
                scale * (s * p.x() + c * p.y()) + translation.y());
  }

  Vec2 apply_inverse(const Vec2& p) const {
    double c = std::cos(rotation_rad), s = std::sin(rotation_rad);
    Vec2 q = p - translation;
    return Vec2((c * q.x() + s * q.y()) / scale, (-s * q.x() + c * q.y()) / scale);
  }
};

}  // namespace gslift
