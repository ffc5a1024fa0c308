#pragma once

#include <string_view>

#include "aesop/tensor.hpp"

namespace aesop {

enum class ColorSpace { kRGB, kY };

std::string_view to_string(ColorSpace cs);

/// Planar image or batch of images with values nominally in [0,1].
///
/// Storage is row-major [C,H,W] (unbatched) or [N,C,H,W] (batched). The
/// constructor enforces the channel count implied by the color space and
/// rejects non-finite values. Values are not clamped: loss paths operate on
/// unclamped data and only export/metrics quantize.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(Tensor data, ColorSpace color_space);

  static ImageTensor rgb(int height, int width, double fill = 0.0);
  static ImageTensor luma(int height, int width, double fill = 0.0);

  const Tensor& tensor() const { return data_; }
  /// Mutable access; callers must keep values finite.
  Tensor& mutable_tensor() { return data_; }
  ColorSpace color_space() const { return color_space_; }

  bool batched() const { return data_.rank() == 4; }
  int batch() const { return batched() ? data_.dim(0) : 1; }
  int channels() const { return data_.dim(-3); }
  int height() const { return data_.dim(-2); }
  int width() const { return data_.dim(-1); }

  /// [C,H,W] -> [1,C,H,W]; batched inputs are returned unchanged.
  ImageTensor as_batch() const;
  /// Image `index` of a batch as an unbatched [C,H,W] image.
  ImageTensor item(int index) const;

  double& at(int c, int h, int w) { return data_.at(c, h, w); }
  double at(int c, int h, int w) const { return data_.at(c, h, w); }

 private:
  Tensor data_;
  ColorSpace color_space_ = ColorSpace::kRGB;
};

/// Stacks equally shaped unbatched images into [N,C,H,W].
ImageTensor stack(const std::vector<ImageTensor>& images);

/// Full-range BT.601 luminance: Y = 0.299 R + 0.587 G + 0.114 B.
///
/// Evaluated as G + 0.299 (R - G) + 0.114 (B - G) so that gray pixels map to
/// their exact value.
ImageTensor rgb_to_y(const ImageTensor& img);

/// Space-to-depth on [C,H,W] or [N,C,H,W]. Output channel index is
/// c*s*s + dy*s + dx for the input pixel at (y*s + dy, x*s + dx). The result
/// has C*s^2 channels, so it is a feature tensor rather than an image.
Tensor pixel_unshuffle(const Tensor& x, int scale);
Tensor pixel_unshuffle(const ImageTensor& img, int scale);
/// Exact inverse of pixel_unshuffle.
Tensor pixel_shuffle(const Tensor& x, int scale);

/// Clamp to [0,1] and round to the nearest of 256 levels.
ImageTensor quantize8(const ImageTensor& img);
double quantize8(double v);

/// Removes `border` pixels from every side.
ImageTensor crop_border(const ImageTensor& img, int border);
/// Crop a window from an unbatched or batched image.
ImageTensor crop(const ImageTensor& img, int top, int left, int height, int width);

/// Largest centered crop whose dims are divisible by `scale`.
ImageTensor center_crop_divisible(const ImageTensor& img, int scale);

double mean_value(const ImageTensor& img);

}  // namespace aesop
