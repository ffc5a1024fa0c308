#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aesop/autoencoder.hpp"
#include "aesop/image.hpp"
#include "aesop/resample.hpp"

namespace aesop {

/// PSNR reported for identical inputs, in dB.
inline constexpr double kInfinitePsnr = 1e9;

struct MetricOptions {
  bool on_y = true;
  int border = 0;
  /// Clamp and round both inputs to 8 bits first, as a file round trip would.
  bool quantize = true;
};

/// 10 log10(1 / MSE) on [0,1] data; kInfinitePsnr when MSE is zero.
double psnr(const ImageTensor& a, const ImageTensor& b, const MetricOptions& options = {});

/// Mean SSIM over valid window positions: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 1. Multi-channel inputs average the channels.
/// Throws DimensionError when the image is smaller than the window.
double ssim(const ImageTensor& a, const ImageTensor& b, const MetricOptions& options = {});

/// PSNR between ae(sr) and ae(hr) on Y with a border of ae.scale().
double ae_psnr(const ImageTensor& sr, const ImageTensor& hr, FidelityBiasEstimator& ae);

/// PSNR between bicubic_downsample(sr) and the reference LR on Y, border 1.
double lr_psnr(const ImageTensor& sr, const ImageTensor& lr_ref, const ResampleSpec& spec);

struct MetricRecord {
  std::string metric;
  double value = 0;
  std::string dataset;
  std::string image;
  std::string checkpoint;
  nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json metric_meta(const MetricOptions& options);

/// Sorts by (dataset, image, metric, checkpoint) and writes
/// dataset,image,checkpoint,metric,value,meta. Infinite PSNR is written as
/// the sentinel.
void write_metric_csv(const std::filesystem::path& path, std::vector<MetricRecord> records);

}  // namespace aesop
