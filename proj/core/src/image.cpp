#include "aesop/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

std::string_view to_string(ColorSpace cs) { return cs == ColorSpace::kRGB ? "RGB" : "Y"; }

ImageTensor::ImageTensor(Tensor data, ColorSpace color_space)
    : data_(std::move(data)), color_space_(color_space) {
  if (data_.rank() != 3 && data_.rank() != 4) {
    throw DimensionError("image tensor must be [C,H,W] or [N,C,H,W], got " + to_string(data_.shape()));
  }
  const int expected = color_space_ == ColorSpace::kRGB ? 3 : 1;
  if (channels() != expected) {
    throw TypeError(fmt::format("{} image needs {} channels, got {}", to_string(color_space_), expected,
                                channels()));
  }
  if (height() < 1 || width() < 1) throw DimensionError("image must be at least 1x1");
  if (!data_.all_finite()) throw DomainError("image contains non-finite values");
}

ImageTensor ImageTensor::rgb(int height, int width, double fill) {
  return ImageTensor(Tensor({3, height, width}, fill), ColorSpace::kRGB);
}

ImageTensor ImageTensor::luma(int height, int width, double fill) {
  return ImageTensor(Tensor({1, height, width}, fill), ColorSpace::kY);
}

ImageTensor ImageTensor::as_batch() const {
  if (batched()) return *this;
  Shape s = data_.shape();
  s.insert(s.begin(), 1);
  return ImageTensor(data_.reshaped(s), color_space_);
}

ImageTensor ImageTensor::item(int index) const {
  if (!batched()) {
    if (index != 0) throw DimensionError("unbatched image has only item 0");
    return *this;
  }
  if (index < 0 || index >= batch()) throw DimensionError("batch index out of range");
  const std::size_t per = data_.size() / static_cast<std::size_t>(batch());
  std::vector<double> v(data_.data() + per * index, data_.data() + per * (index + 1));
  return ImageTensor(Tensor({channels(), height(), width()}, std::move(v)), color_space_);
}

ImageTensor stack(const std::vector<ImageTensor>& images) {
  if (images.empty()) throw DimensionError("cannot stack zero images");
  const auto& first = images.front();
  std::vector<double> v;
  v.reserve(first.tensor().size() * images.size());
  for (const auto& im : images) {
    if (im.batched() || im.tensor().shape() != first.tensor().shape() ||
        im.color_space() != first.color_space()) {
      throw DimensionError("stack requires equally shaped unbatched images");
    }
    v.insert(v.end(), im.tensor().values().begin(), im.tensor().values().end());
  }
  return ImageTensor(
      Tensor({static_cast<int>(images.size()), first.channels(), first.height(), first.width()}, std::move(v)),
      first.color_space());
}

ImageTensor rgb_to_y(const ImageTensor& img) {
  if (img.color_space() != ColorSpace::kRGB) throw TypeError("rgb_to_y expects an RGB image");
  const int n = img.batch(), h = img.height(), w = img.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out(img.batched() ? Shape{n, 1, h, w} : Shape{1, h, w});
  const double* src = img.tensor().data();
  double* dst = out.data();
  for (int b = 0; b < n; ++b) {
    const double* r = src + 3 * plane * b;
    const double* g = r + plane;
    const double* bl = g + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      dst[plane * b + i] = g[i] + 0.299 * (r[i] - g[i]) + 0.114 * (bl[i] - g[i]);
    }
  }
  return ImageTensor(std::move(out), ColorSpace::kY);
}

namespace {

Tensor as4(const ImageTensor& img) { return img.as_batch().tensor(); }

Tensor to4(const Tensor& x, const char* what) {
  if (x.rank() == 4) return x;
  if (x.rank() == 3) return x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  throw DimensionError(std::string(what) + " expects [C,H,W] or [N,C,H,W]");
}

Tensor restore_rank(Tensor t, bool batched) {
  if (batched) return t;
  Shape s(t.shape().begin() + 1, t.shape().end());
  return t.reshaped(s);
}

}  // namespace

Tensor pixel_unshuffle(const Tensor& input, int s) {
  const Tensor x = to4(input, "pixel_unshuffle");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (s < 1 || h % s != 0 || w % s != 0) {
    throw DimensionError(fmt::format("pixel_unshuffle: {}x{} not divisible by {}", h, w, s));
  }
  const int ho = h / s, wo = w / s;
  Tensor out({n, c * s * s, ho, wo});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx) {
          const int oc = ch * s * s + dy * s + dx;
          for (int y = 0; y < ho; ++y)
            for (int xx = 0; xx < wo; ++xx) out.at(b, oc, y, xx) = x.at(b, ch, y * s + dy, xx * s + dx);
        }
  return restore_rank(std::move(out), input.rank() == 4);
}

Tensor pixel_unshuffle(const ImageTensor& img, int scale) { return pixel_unshuffle(img.tensor(), scale); }

Tensor pixel_shuffle(const Tensor& input, int s) {
  const Tensor x = to4(input, "pixel_shuffle");
  const int n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (s < 1 || cin % (s * s) != 0) {
    throw DimensionError(fmt::format("pixel_shuffle: {} channels not divisible by {}", cin, s * s));
  }
  const int c = cin / (s * s);
  Tensor out({n, c, h * s, w * s});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx) {
          const int ic = ch * s * s + dy * s + dx;
          for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) out.at(b, ch, y * s + dy, xx * s + dx) = x.at(b, ic, y, xx);
        }
  return restore_rank(std::move(out), input.rank() == 4);
}

double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

ImageTensor quantize8(const ImageTensor& img) {
  Tensor t = img.tensor();
  for (double& v : t.values()) v = quantize8(v);
  return ImageTensor(std::move(t), img.color_space());
}

ImageTensor crop(const ImageTensor& img, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height < 1 || width < 1 || top + height > img.height() ||
      left + width > img.width()) {
    throw DimensionError(fmt::format("crop ({},{},{}x{}) outside {}x{} image", top, left, height, width,
                                     img.height(), img.width()));
  }
  const Tensor src = as4(img);
  const int n = src.dim(0), c = src.dim(1);
  Tensor out({n, c, height, width});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out.at(b, ch, y, x) = src.at(b, ch, top + y, left + x);
  return ImageTensor(restore_rank(std::move(out), img.batched()), img.color_space());
}

ImageTensor crop_border(const ImageTensor& img, int border) {
  if (border == 0) return img;
  if (border < 0 || 2 * border >= std::min(img.height(), img.width())) {
    throw DimensionError(fmt::format("border {} too large for {}x{} image", border, img.height(), img.width()));
  }
  return crop(img, border, border, img.height() - 2 * border, img.width() - 2 * border);
}

ImageTensor center_crop_divisible(const ImageTensor& img, int scale) {
  const int h = img.height() - img.height() % scale;
  const int w = img.width() - img.width() % scale;
  if (h == 0 || w == 0) throw DimensionError("image smaller than the scale factor");
  if (h == img.height() && w == img.width()) return img;
  return crop(img, (img.height() - h) / 2, (img.width() - w) / 2, h, w);
}

double mean_value(const ImageTensor& img) {
  const auto v = img.tensor().values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace aesop
