#pragma once

// Reference implementations used only by tests. They share no code with the
// library: loops are direct and unoptimized so they can be checked by eye.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "aesop/autograd.hpp"
#include "aesop/image.hpp"

namespace aesop::testing {

/// Keys cubic convolution kernel, written out from its definition.
double keys_kernel(double x, double a);

/// Antialiased bicubic downscale of one [H,W] plane by direct 2-D
/// convolution over the full reflected input.
std::vector<double> direct_bicubic_down(const std::vector<double>& plane, int h, int w, int s, double a);

/// Bicubic upscale of one [h,w] plane by direct 2-D interpolation.
std::vector<double> direct_bicubic_up(const std::vector<double>& plane, int h, int w, int s, double a);

/// Mean SSIM of two [H,W] planes over all fully covered 11x11 windows.
double windowed_ssim(const std::vector<double>& x, const std::vector<double>& y, int h, int w);

/// Luma plane with full-range BT.601 weights.
std::vector<double> luma_plane(const ImageTensor& rgb);

/// Uniform random image in [0,1].
ImageTensor random_image(int channels, int height, int width, std::uint64_t seed);
Tensor random_tensor(const Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

/// Central finite-difference derivative of `f` w.r.t. x[index].
double central_difference(const std::function<double(const Tensor&)>& f, const Tensor& x, std::size_t index,
                          double eps = 1e-6);

struct GradientCheck {
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;
};

/// Compares the backward gradient of `loss(x)` with central differences at
/// `samples` random coordinates. Relative error uses max(|a|,|b|,1e-8) as
/// the denominator.
GradientCheck check_gradient(const std::function<ag::Var(const ag::Var&)>& loss, const Tensor& x, int samples,
                             std::uint64_t seed, double eps = 1e-6);

/// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace aesop::testing
