#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aesop/autoencoder.hpp"
#include "aesop/dataset.hpp"
#include "aesop/image.hpp"
#include "aesop/networks.hpp"

namespace aesop {

/// Per-pixel error maps (channel means of unbatched RGB images).
struct LossMaps {
  ImageTensor pixel;     // |sr - hr|
  ImageTensor aesop;     // |ae(sr) - ae(hr)|
  ImageTensor bias;      // ae(hr)
  ImageTensor variance;  // max(|sr - hr| - |ae(sr) - ae(hr)|, 0)
  /// Divisor mapping the error maps into [0,1] for export.
  double scale = 1.0;
  double pixel_mean = 0;
  double aesop_mean = 0;
  double variance_mean = 0;
};

LossMaps compute_loss_maps(const ImageTensor& sr, const ImageTensor& hr, FidelityBiasEstimator& ae);

/// Writes pixel_map.png, aesop_map.png, fidelity_bias.png, variance_map.png
/// and loss_maps.json (scale and means) into `out_dir`.
LossMaps export_loss_maps(const ImageTensor& sr, const ImageTensor& hr, FidelityBiasEstimator& ae,
                          const std::filesystem::path& out_dir);

struct SpectralReport {
  Tensor original;
  Tensor autoencoded;
  Tensor lowpassed;
  /// |magnitude(ae(img)) - magnitude(lowpass(img))|
  Tensor difference;
  double cutoff = 0.125;
  /// HF energy of ae(img) over HF energy of img, on Y.
  double ae_retention = 0;
  /// Same ratio for the ideal low-pass branch.
  double lpf_retention = 0;
};

/// Spectral comparison of the autoencoder against an ideal low-pass filter.
/// Retention ratios are 0 when the input has no energy above the cutoff.
SpectralReport spectral_report(const ImageTensor& img, FidelityBiasEstimator& ae, double cutoff = 0.125);

/// Writes the four log-magnitude spectra as PNGs (each divided by its own
/// maximum) plus spectral_report.json.
void write_spectral_report(const SpectralReport& report, const std::filesystem::path& out_dir);

struct PdCheckpoint {
  std::string id;
  std::int64_t step = 0;
  std::filesystem::path path;
};

struct PdRow {
  std::string id;
  std::int64_t step = 0;
  double psnr = 0;
  double proxy_perception = 0;
};

/// Proxy perception score of one SR/HR pair: -percep(sr, hr) * (1 + |1 - rho|)
/// with rho = HF energy(sr) / HF energy(hr) on Y at `cutoff`. Higher is
/// better. Not a learned perceptual metric.
double proxy_perception(const ImageTensor& sr, const ImageTensor& hr, const ConvFeatureExtractor& extractor,
                        double cutoff = 0.125);

/// Evaluates each generator checkpoint on the dataset (mean Y PSNR with a
/// border of the scale, mean proxy score), sorted by training step, and
/// writes checkpoint,step,psnr,proxy_perception to `csv` when non-empty.
std::vector<PdRow> pd_curve_emit(const std::vector<PdCheckpoint>& checkpoints, const GeneratorConfig& cfg,
                                 const PairedDataset& dataset, const ConvFeatureExtractor& extractor,
                                 const std::filesystem::path& csv);

}  // namespace aesop
