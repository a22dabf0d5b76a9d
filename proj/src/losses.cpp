#include "gslift/losses.hpp"

#include <algorithm>
#include <cmath>

#include "gslift/error.hpp"
#include "gslift/rng.hpp"

namespace gslift {

namespace {

constexpr int kLevels = 4;
constexpr int kBank = 8;
constexpr uint64_t kFilterSeed = 42;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Fixed filter bank: zero-mean (band-pass) unit-norm 3x3x3 filters, drawn
// once per process from a fixed seed.
struct FilterBank {
  double w[kBank][3][3][3];  // [filter][channel][ky][kx]
};

const FilterBank& bank() {
  static const FilterBank fb = [] {
    FilterBank f{};
    Rng rng(kFilterSeed);
    for (int o = 0; o < kBank; ++o) {
      double mean = 0;
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 3; ++y)
          for (int x = 0; x < 3; ++x) {
            f.w[o][c][y][x] = rng.uniform(-1.0, 1.0);
            mean += f.w[o][c][y][x];
          }
      mean /= 27.0;
      double norm2 = 0;
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 3; ++y)
          for (int x = 0; x < 3; ++x) {
            f.w[o][c][y][x] -= mean;
            norm2 += f.w[o][c][y][x] * f.w[o][c][y][x];
          }
      double inv = 1.0 / std::sqrt(norm2);
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 3; ++y)
          for (int x = 0; x < 3; ++x) f.w[o][c][y][x] *= inv;
    }
    return f;
  }();
  return fb;
}

int clampi(int v, int hi) { return std::clamp(v, 0, hi); }

constexpr double kBinom[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

// 5-tap binomial blur (replicate borders) then keep even rows/columns.
ImageBuffer binom_down(const ImageBuffer& src) {
  ImageBuffer tx(src.width, src.height, src.channels);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      for (int c = 0; c < src.channels; ++c) {
        double s = 0;
        for (int k = -2; k <= 2; ++k) s += kBinom[k + 2] * src.at(clampi(x + k, src.width - 1), y, c);
        tx.at(x, y, c) = s;
      }
  ImageBuffer ty(src.width, src.height, src.channels);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      for (int c = 0; c < src.channels; ++c) {
        double s = 0;
        for (int k = -2; k <= 2; ++k) s += kBinom[k + 2] * tx.at(x, clampi(y + k, src.height - 1), c);
        ty.at(x, y, c) = s;
      }
  ImageBuffer out((src.width + 1) / 2, (src.height + 1) / 2, src.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < out.channels; ++c) out.at(x, y, c) = ty.at(2 * x, 2 * y, c);
  return out;
}

// Exact adjoint of binom_down: scatter even taps, then transpose each
// separable pass (replicate borders accumulate onto the clamped pixel).
ImageBuffer binom_down_adjoint(const ImageBuffer& d_out, int src_w, int src_h) {
  ImageBuffer dy(src_w, src_h, d_out.channels);
  for (int y = 0; y < d_out.height; ++y)
    for (int x = 0; x < d_out.width; ++x)
      for (int c = 0; c < d_out.channels; ++c) dy.at(2 * x, 2 * y, c) = d_out.at(x, y, c);
  ImageBuffer dx(src_w, src_h, d_out.channels);
  for (int y = 0; y < src_h; ++y)
    for (int x = 0; x < src_w; ++x)
      for (int c = 0; c < d_out.channels; ++c) {
        double g = dy.at(x, y, c);
        if (g == 0) continue;
        for (int k = -2; k <= 2; ++k) dx.at(x, clampi(y + k, src_h - 1), c) += kBinom[k + 2] * g;
      }
  ImageBuffer ds(src_w, src_h, d_out.channels);
  for (int y = 0; y < src_h; ++y)
    for (int x = 0; x < src_w; ++x)
      for (int c = 0; c < d_out.channels; ++c) {
        double g = dx.at(x, y, c);
        if (g == 0) continue;
        for (int k = -2; k <= 2; ++k) ds.at(clampi(x + k, src_w - 1), y, c) += kBinom[k + 2] * g;
      }
  return ds;
}

// Pre-activation responses of the filter bank (replicate borders).
ImageBuffer bank_conv(const ImageBuffer& img) {
  const FilterBank& fb = bank();
  ImageBuffer out(img.width, img.height, kBank);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int o = 0; o < kBank; ++o) {
        double s = 0;
        for (int c = 0; c < 3; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx)
              s += fb.w[o][c][ky][kx] *
                   img.at(clampi(x + kx - 1, img.width - 1), clampi(y + ky - 1, img.height - 1), c);
        out.at(x, y, o) = s;
      }
  return out;
}

ImageBuffer bank_conv_adjoint(const ImageBuffer& d_z, int src_w, int src_h) {
  const FilterBank& fb = bank();
  ImageBuffer d_img(src_w, src_h, 3);
  for (int y = 0; y < d_z.height; ++y)
    for (int x = 0; x < d_z.width; ++x)
      for (int o = 0; o < kBank; ++o) {
        double g = d_z.at(x, y, o);
        if (g == 0) continue;
        for (int c = 0; c < 3; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx)
              d_img.at(clampi(x + kx - 1, src_w - 1), clampi(y + ky - 1, src_h - 1), c) +=
                  fb.w[o][c][ky][kx] * g;
      }
  return d_img;
}

struct PyramidActivations {
  std::vector<ImageBuffer> g;  // g[0] = input, g[k] downsampled, k = 0..kLevels
  std::vector<ImageBuffer> z;  // z[k] pre-activation responses of g[k+1], k = 0..kLevels-1
};

PyramidActivations run_pyramid(const ImageBuffer& image) {
  PyramidActivations acts;
  acts.g.push_back(image);
  for (int k = 1; k <= kLevels; ++k) {
    acts.g.push_back(binom_down(acts.g.back()));
    acts.z.push_back(bank_conv(acts.g.back()));
  }
  return acts;
}

std::vector<char> mask_bits(const ImageBuffer& mask, int w, int h, size_t* count) {
  if (mask.channels != 1 || mask.width != w || mask.height != h)
    throw Error(ErrorCode::dimension_mismatch, "mask shape");
  std::vector<char> bits(mask.data.size());
  size_t n = 0;
  for (size_t i = 0; i < mask.data.size(); ++i) {
    bits[i] = mask.data[i] > 0.5;
    n += bits[i];
  }
  if (n == 0) throw Error(ErrorCode::empty_mask, "mask excludes every pixel");
  *count = n;
  return bits;
}

}  // namespace

double l1(const ImageBuffer& a, const ImageBuffer& b, const ImageBuffer* mask) {
  require_same_shape(a, b, "l1");
  double sum = 0;
  if (!mask) {
    for (size_t i = 0; i < a.data.size(); ++i) sum += std::abs(a.data[i] - b.data[i]);
    return sum / static_cast<double>(a.data.size());
  }
  size_t count = 0;
  std::vector<char> bits = mask_bits(*mask, a.width, a.height, &count);
  for (size_t p = 0; p < bits.size(); ++p) {
    if (!bits[p]) continue;
    for (int c = 0; c < a.channels; ++c)
      sum += std::abs(a.data[p * a.channels + c] - b.data[p * a.channels + c]);
  }
  return sum / (static_cast<double>(count) * a.channels);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b, const ImageBuffer* mask) {
  require_same_shape(a, b, "psnr");
  double sum = 0;
  size_t n = 0;
  if (!mask) {
    for (size_t i = 0; i < a.data.size(); ++i) {
      double d = a.data[i] - b.data[i];
      sum += d * d;
    }
    n = a.data.size();
  } else {
    size_t count = 0;
    std::vector<char> bits = mask_bits(*mask, a.width, a.height, &count);
    for (size_t p = 0; p < bits.size(); ++p) {
      if (!bits[p]) continue;
      for (int c = 0; c < a.channels; ++c) {
        double d = a.data[p * a.channels + c] - b.data[p * a.channels + c];
        sum += d * d;
      }
    }
    n = count * static_cast<size_t>(a.channels);
  }
  double mse = sum / static_cast<double>(n);
  if (mse <= 0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

ReferenceLossResult reference_loss(const RenderedView& rendered, const ImageBuffer& target_rgb,
                                   const ImageBuffer& target_mask) {
  require_same_shape(rendered.rgb, target_rgb, "reference_loss rgb");
  require_same_shape(rendered.alpha, target_mask, "reference_loss alpha");
  ReferenceLossResult res;
  res.d_rgb = ImageBuffer(target_rgb.width, target_rgb.height, 3);
  res.d_alpha = ImageBuffer(target_rgb.width, target_rgb.height, 1);
  double inv_rgb = 1.0 / static_cast<double>(target_rgb.data.size());
  double inv_a = 1.0 / static_cast<double>(target_mask.data.size());
  for (size_t i = 0; i < target_rgb.data.size(); ++i) {
    double d = rendered.rgb.data[i] - target_rgb.data[i];
    res.loss += std::abs(d) * inv_rgb;
    res.d_rgb.data[i] = sgn(d) * inv_rgb;
  }
  for (size_t i = 0; i < target_mask.data.size(); ++i) {
    double d = rendered.alpha.data[i] - target_mask.data[i];
    res.loss += std::abs(d) * inv_a;
    res.d_alpha.data[i] = sgn(d) * inv_a;
  }
  return res;
}

FeaturePyramid feature_pyramid(const ImageBuffer& image) {
  if (image.channels != 3) throw Error(ErrorCode::dimension_mismatch, "pyramid wants 3 channels");
  PyramidActivations acts = run_pyramid(image);
  FeaturePyramid fp;
  for (ImageBuffer& z : acts.z) {
    for (double& v : z.data) v = std::abs(v);
    fp.levels.push_back(std::move(z));
  }
  return fp;
}

PerceptualResult perceptual(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "perceptual");
  if (a.channels != 3) throw Error(ErrorCode::dimension_mismatch, "perceptual wants 3 channels");
  PyramidActivations pa = run_pyramid(a);
  PyramidActivations pb = run_pyramid(b);

  PerceptualResult res;
  std::vector<ImageBuffer> d_z(kLevels);
  for (int k = 0; k < kLevels; ++k) {
    const ImageBuffer& za = pa.z[k];
    const ImageBuffer& zb = pb.z[k];
    d_z[k] = ImageBuffer(za.width, za.height, kBank);
    double inv_n = 1.0 / static_cast<double>(za.data.size());
    for (size_t i = 0; i < za.data.size(); ++i) {
      double diff = std::abs(za.data[i]) - std::abs(zb.data[i]);
      res.loss += std::abs(diff) * inv_n;
      d_z[k].data[i] = sgn(diff) * sgn(za.data[i]) * inv_n;
    }
  }

  // Walk the chain back down to the input resolution.
  ImageBuffer d_g;  // gradient w.r.t. pa.g[k]
  for (int k = kLevels; k >= 1; --k) {
    ImageBuffer d_here = bank_conv_adjoint(d_z[k - 1], pa.g[k].width, pa.g[k].height);
    if (d_g.width != 0)
      for (size_t i = 0; i < d_here.data.size(); ++i) d_here.data[i] += d_g.data[i];
    d_g = binom_down_adjoint(d_here, pa.g[k - 1].width, pa.g[k - 1].height);
  }
  res.d_a = std::move(d_g);
  return res;
}

double masked_perceptual(const ImageBuffer& a, const ImageBuffer& b, const ImageBuffer& mask) {
  require_same_shape(a, b, "masked_perceptual");
  if (mask.channels != 1 || mask.width != a.width || mask.height != a.height)
    throw Error(ErrorCode::dimension_mismatch, "mask shape");
  ImageBuffer ma(a.width, a.height, a.channels);
  ImageBuffer mb(a.width, a.height, a.channels);
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      double m = mask.at(x, y, 0);
      for (int c = 0; c < a.channels; ++c) {
        ma.at(x, y, c) = a.at(x, y, c) * m;
        mb.at(x, y, c) = b.at(x, y, c) * m;
      }
    }
  return perceptual(ma, mb).loss;
}

ImageBuffer sds_grad(const RenderedView& rendered, const ImageBuffer& condition,
                     const RelativePose& rel_pose, int t, const ImageBuffer& eps,
                     const SynthesizerOracle& oracle, const NoiseSchedule& schedule) {
  if (t < schedule.t_min() || t > schedule.t_max())
    throw Error(ErrorCode::out_of_range, "timestep outside sampling window");
  require_same_shape(rendered.rgb, eps, "sds_grad eps");
  ImageBuffer x_t = forward_diffuse(rendered.rgb, t, eps, schedule);
  ImageBuffer eps_hat = oracle.predict_noise(x_t, t, condition, rel_pose);
  require_same_shape(eps_hat, eps, "sds_grad prediction");
  double w = 1.0 - schedule.alpha_bar_at(t);
  ImageBuffer out(eps.width, eps.height, eps.channels);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = w * (eps_hat.data[i] - eps.data[i]);
  return out;
}

}  // namespace gslift
