#pragma once

#include <vector>

#include "aesop/image.hpp"

namespace aesop {

enum class ResampleKernel { kBicubic };

/// Integer-factor bicubic resampling parameters. The defaults reproduce the
/// usual SR dataset convention (a = -0.5, antialiased downscaling with the
/// kernel stretched by the scale factor, whole-sample reflected borders).
struct ResampleSpec {
  int scale = 4;
  ResampleKernel kernel = ResampleKernel::kBicubic;
  double kernel_a = -0.5;
  bool antialias = true;
};

/// Cubic convolution kernel with parameter a.
double cubic_kernel(double x, double a);

/// One output sample of a separable 1-D resampling pass.
struct ResampleTaps {
  std::vector<int> index;
  std::vector<double> weight;
};

enum class ResampleDirection { kDown, kUp };

/// Per-output taps along one axis, border indices already mirrored and
/// weights normalized to sum to one.
std::vector<ResampleTaps> resample_taps(int in_length, int out_length, ResampleDirection direction,
                                        const ResampleSpec& spec);

/// [C,H,W] or [N,C,H,W] -> dims divided by spec.scale. Throws DimensionError
/// when H or W is not divisible. Output is not clamped.
ImageTensor bicubic_downsample(const ImageTensor& img, const ResampleSpec& spec);
Tensor bicubic_downsample(const Tensor& x, const ResampleSpec& spec);

/// Dims multiplied by spec.scale. Output is not clamped.
ImageTensor bicubic_upsample(const ImageTensor& img, const ResampleSpec& spec);
Tensor bicubic_upsample(const Tensor& x, const ResampleSpec& spec);

}  // namespace aesop
