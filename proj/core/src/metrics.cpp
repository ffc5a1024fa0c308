#include "aesop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "aesop/csv.hpp"
#include "aesop/errors.hpp"

namespace aesop {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

ImageTensor prepare(const ImageTensor& img, const MetricOptions& o) {
  ImageTensor out = o.quantize ? quantize8(img) : img;
  if (o.on_y && out.color_space() == ColorSpace::kRGB) out = rgb_to_y(out);
  if (o.border > 0) out = crop_border(out, o.border);
  return out;
}

void require_comparable(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (a.color_space() != b.color_space()) throw TypeError(fmt::format("{}: color spaces differ", what));
  require_same_shape(a.tensor(), b.tensor(), what);
}

std::vector<double> gaussian_window() {
  std::vector<double> g(kSsimWindow);
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Valid-region separable filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size());
  const int oh = h - k + 1, ow = w - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += g[i] * plane[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += g[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b, const MetricOptions& options) {
  require_comparable(a, b, "psnr");
  if (options.border < 0 || 2 * options.border >= std::min(a.height(), a.width())) {
    throw DimensionError(fmt::format("psnr border {} too large for {}x{}", options.border, a.height(), a.width()));
  }
  const ImageTensor pa = prepare(a, options);
  const ImageTensor pb = prepare(b, options);
  const Tensor& ta = pa.tensor();
  const Tensor& tb = pb.tensor();
  // Extended accumulation keeps a uniform offset d at MSE = round(d * d), and
  // the RMSE form then gives 20 log10(1 / d) without a spurious last bit.
  long double se = 0.0L;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const long double d = static_cast<long double>(ta[i]) - tb[i];
    se += d * d;
  }
  const double mse = static_cast<double>(se / ta.size());
  if (mse == 0.0) return kInfinitePsnr;
  return 20.0 * std::log10(1.0 / std::sqrt(mse));
}

double ssim(const ImageTensor& a, const ImageTensor& b, const MetricOptions& options) {
  require_comparable(a, b, "ssim");
  const ImageTensor pa = prepare(a, options).as_batch();
  const ImageTensor pb = prepare(b, options).as_batch();
  const int h = pa.height(), w = pa.width();
  if (h < kSsimWindow || w < kSsimWindow) {
    throw DimensionError(fmt::format("ssim needs at least {}x{} pixels, got {}x{}", kSsimWindow, kSsimWindow, h, w));
  }
  const auto g = gaussian_window();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  double total = 0.0;
  std::size_t count = 0;
  for (int n = 0; n < pa.batch(); ++n)
    for (int c = 0; c < pa.channels(); ++c) {
      const double* x = pa.tensor().data() + (static_cast<std::size_t>(n) * pa.channels() + c) * plane;
      const double* y = pb.tensor().data() + (static_cast<std::size_t>(n) * pb.channels() + c) * plane;
      std::vector<double> px(x, x + plane), py(y, y + plane), pxx(plane), pyy(plane), pxy(plane);
      for (std::size_t i = 0; i < plane; ++i) {
        pxx[i] = x[i] * x[i];
        pyy[i] = y[i] * y[i];
        pxy[i] = x[i] * y[i];
      }
      const auto mx = filter_valid(px, h, w, g);
      const auto my = filter_valid(py, h, w, g);
      const auto sxx = filter_valid(pxx, h, w, g);
      const auto syy = filter_valid(pyy, h, w, g);
      const auto sxy = filter_valid(pxy, h, w, g);
      for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cxy = sxy[i] - mx[i] * my[i];
        total += ((2 * mx[i] * my[i] + kSsimC1) * (2 * cxy + kSsimC2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + kSsimC1) * (vx + vy + kSsimC2));
        ++count;
      }
    }
  return total / static_cast<double>(count);
}

double ae_psnr(const ImageTensor& sr, const ImageTensor& hr, FidelityBiasEstimator& ae) {
  require_comparable(sr, hr, "ae_psnr");
  const ImageTensor a = ae.reconstruct(quantize8(sr));
  const ImageTensor b = ae.reconstruct(quantize8(hr));
  return psnr(a, b, {.on_y = true, .border = ae.scale(), .quantize = true});
}

double lr_psnr(const ImageTensor& sr, const ImageTensor& lr_ref, const ResampleSpec& spec) {
  const ImageTensor down = bicubic_downsample(quantize8(sr), spec);
  return psnr(down, lr_ref, {.on_y = true, .border = 1, .quantize = true});
}

nlohmann::json metric_meta(const MetricOptions& options) {
  return {{"color_space", options.on_y ? "Y(BT.601 full range)" : "RGB"},
          {"border", options.border},
          {"quantized", options.quantize}};
}

void write_metric_csv(const std::filesystem::path& path, std::vector<MetricRecord> records) {
  std::sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
    return std::tie(a.dataset, a.image, a.metric, a.checkpoint) < std::tie(b.dataset, b.image, b.metric, b.checkpoint);
  });
  CsvWriter out(path, {"dataset", "image", "checkpoint", "metric", "value", "meta"});
  for (const auto& r : records) {
    std::string meta = r.meta.dump();
    std::replace(meta.begin(), meta.end(), ',', ';');
    out.row({r.dataset, r.image, r.checkpoint, r.metric, format_number(std::isinf(r.value) ? kInfinitePsnr : r.value),
             meta});
  }
}

}  // namespace aesop
