#include "aesop/resample.hpp"

#include <cmath>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

double cubic_kernel(double x, double a) {
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
  if (ax < 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
  return 0.0;
}

namespace {

// Reflection about the edge pixel centers, without repeating the edge pixel
// (a periodic pattern of period 2 stays periodic).
int mirror_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

void check_spec(const ResampleSpec& spec) {
  if (spec.scale < 1) throw DomainError(fmt::format("resample scale must be >= 1, got {}", spec.scale));
}

Tensor to4(const Tensor& x) {
  if (x.rank() == 4) return x;
  if (x.rank() == 3) return x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  throw DimensionError("resampling expects [C,H,W] or [N,C,H,W], got " + to_string(x.shape()));
}

// Separable pass: rows first, then columns.
Tensor apply_separable(const Tensor& input, int out_h, int out_w, ResampleDirection dir,
                       const ResampleSpec& spec) {
  const Tensor x = to4(input);
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto taps_h = resample_taps(h, out_h, dir, spec);
  const auto taps_w = resample_taps(w, out_w, dir, spec);

  Tensor mid({n, c, out_h, w});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int oy = 0; oy < out_h; ++oy) {
        const auto& t = taps_h[static_cast<std::size_t>(oy)];
        for (int xx = 0; xx < w; ++xx) {
          double acc = 0.0;
          for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * x.at(b, ch, t.index[k], xx);
          mid.at(b, ch, oy, xx) = acc;
        }
      }

  Tensor out({n, c, out_h, out_w});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
          const auto& t = taps_w[static_cast<std::size_t>(ox)];
          double acc = 0.0;
          for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * mid.at(b, ch, oy, t.index[k]);
          out.at(b, ch, oy, ox) = acc;
        }
  if (input.rank() == 3) return out.reshaped({c, out_h, out_w});
  return out;
}

}  // namespace

std::vector<ResampleTaps> resample_taps(int in_length, int out_length, ResampleDirection direction,
                                        const ResampleSpec& spec) {
  const bool down = direction == ResampleDirection::kDown;
  const double s = spec.scale;
  // Antialiased downscaling stretches the kernel by the scale factor.
  const double stretch = down && spec.antialias ? s : 1.0;
  const double half_width = 2.0 * stretch;
  const int taps = static_cast<int>(std::ceil(2.0 * half_width)) + 2;

  std::vector<ResampleTaps> table(static_cast<std::size_t>(out_length));
  for (int i = 0; i < out_length; ++i) {
    // Source coordinate of the output pixel center; pixel j spans [j-0.5, j+0.5].
    const double center = down ? (i + 0.5) * s - 0.5 : (i + 0.5) / s - 0.5;
    const int left = static_cast<int>(std::floor(center - half_width));
    ResampleTaps& entry = table[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
      const int j = left + k;
      const double wgt = cubic_kernel((center - j) / stretch, spec.kernel_a) / stretch;
      if (wgt == 0.0) continue;
      entry.index.push_back(mirror_index(j, in_length));
      entry.weight.push_back(wgt);
      sum += wgt;
    }
    for (double& wgt : entry.weight) wgt /= sum;
  }
  return table;
}

Tensor bicubic_downsample(const Tensor& x, const ResampleSpec& spec) {
  check_spec(spec);
  const int h = x.dim(-2), w = x.dim(-1);
  if (h % spec.scale != 0 || w % spec.scale != 0) {
    throw DimensionError(fmt::format("bicubic_downsample: {}x{} not divisible by {}", h, w, spec.scale));
  }
  return apply_separable(x, h / spec.scale, w / spec.scale, ResampleDirection::kDown, spec);
}

ImageTensor bicubic_downsample(const ImageTensor& img, const ResampleSpec& spec) {
  return ImageTensor(bicubic_downsample(img.tensor(), spec), img.color_space());
}

Tensor bicubic_upsample(const Tensor& x, const ResampleSpec& spec) {
  check_spec(spec);
  return apply_separable(x, x.dim(-2) * spec.scale, x.dim(-1) * spec.scale, ResampleDirection::kUp, spec);
}

ImageTensor bicubic_upsample(const ImageTensor& img, const ResampleSpec& spec) {
  return ImageTensor(bicubic_upsample(img.tensor(), spec), img.color_space());
}

}  // namespace aesop
