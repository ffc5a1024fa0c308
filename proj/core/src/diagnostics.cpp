#include "aesop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "aesop/csv.hpp"
#include "aesop/errors.hpp"
#include "aesop/image_io.hpp"
#include "aesop/losses.hpp"
#include "aesop/metrics.hpp"
#include "aesop/spectral.hpp"

namespace aesop {

namespace {

// Channel mean of |a - b| for unbatched RGB images.
ImageTensor abs_diff_map(const ImageTensor& a, const ImageTensor& b) {
  ImageTensor out = ImageTensor::luma(a.height(), a.width());
  const double inv = 1.0 / a.channels();
  for (int c = 0; c < a.channels(); ++c)
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x) out.at(0, y, x) += std::abs(a.at(c, y, x) - b.at(c, y, x)) * inv;
  return out;
}

ImageTensor scaled(const ImageTensor& m, double divisor) {
  Tensor t = m.tensor();
  for (double& v : t.values()) v = std::clamp(v / divisor, 0.0, 1.0);
  return ImageTensor(std::move(t), m.color_space());
}

double max_value(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, v);
  return m;
}

void write_spectrum(const std::filesystem::path& path, const Tensor& spectrum) {
  const int h = spectrum.dim(0), w = spectrum.dim(1);
  const double m = max_value(spectrum);
  Tensor t({1, h, w});
  for (std::size_t i = 0; i < spectrum.size(); ++i) t[i] = m > 0 ? spectrum[i] / m : 0.0;
  write_png(path, ImageTensor(std::move(t), ColorSpace::kY));
}

ImageTensor to_y(const ImageTensor& img) { return img.color_space() == ColorSpace::kY ? img : rgb_to_y(img); }

}  // namespace

LossMaps compute_loss_maps(const ImageTensor& sr, const ImageTensor& hr, FidelityBiasEstimator& ae) {
  if (sr.batched() || hr.batched()) throw DimensionError("loss maps are computed per image");
  require_same_shape(sr.tensor(), hr.tensor(), "loss maps");
  LossMaps m;
  const ImageTensor ae_sr = ae.reconstruct(sr);
  m.bias = ae.reconstruct(hr);
  m.pixel = abs_diff_map(sr, hr);
  m.aesop = abs_diff_map(ae_sr, m.bias);
  Tensor ve = m.pixel.tensor();
  for (std::size_t i = 0; i < ve.size(); ++i) ve[i] = std::max(ve[i] - m.aesop.tensor()[i], 0.0);
  m.variance = ImageTensor(std::move(ve), ColorSpace::kY);
  m.pixel_mean = mean_value(m.pixel);
  m.aesop_mean = mean_value(m.aesop);
  m.variance_mean = mean_value(m.variance);
  const double peak = std::max(max_value(m.pixel.tensor()), max_value(m.aesop.tensor()));
  m.scale = peak > 0.0 ? peak : 1.0;
  return m;
}

LossMaps export_loss_maps(const ImageTensor& sr, const ImageTensor& hr, FidelityBiasEstimator& ae,
                          const std::filesystem::path& out_dir) {
  LossMaps m = compute_loss_maps(sr, hr, ae);
  std::filesystem::create_directories(out_dir);
  write_png(out_dir / "pixel_map.png", scaled(m.pixel, m.scale));
  write_png(out_dir / "aesop_map.png", scaled(m.aesop, m.scale));
  write_png(out_dir / "variance_map.png", scaled(m.variance, m.scale));
  write_png(out_dir / "fidelity_bias.png", m.bias);
  std::ofstream(out_dir / "loss_maps.json") << nlohmann::json{{"scale", m.scale},
                                                               {"pixel_mean", m.pixel_mean},
                                                               {"aesop_mean", m.aesop_mean},
                                                               {"variance_mean", m.variance_mean}}
                                                   .dump(2)
                                            << '\n';
  return m;
}

SpectralReport spectral_report(const ImageTensor& img, FidelityBiasEstimator& ae, double cutoff) {
  if (img.batched()) throw DimensionError("spectral report expects one image");
  SpectralReport r;
  r.cutoff = cutoff;
  const ImageTensor autoencoded = ae.reconstruct(img);
  const ImageTensor lowpassed = lowpass_filter(img, cutoff);
  const ImageTensor y = to_y(img), y_ae = to_y(autoencoded), y_lp = to_y(lowpassed);
  r.original = spectral_magnitude(y);
  r.autoencoded = spectral_magnitude(y_ae);
  r.lowpassed = spectral_magnitude(y_lp);
  r.difference = Tensor(r.autoencoded.shape());
  for (std::size_t i = 0; i < r.difference.size(); ++i) {
    r.difference[i] = std::abs(r.autoencoded[i] - r.lowpassed[i]);
  }
  const double hf = high_frequency_energy(y, cutoff);
  r.ae_retention = hf > 0.0 ? high_frequency_energy(y_ae, cutoff) / hf : 0.0;
  r.lpf_retention = hf > 0.0 ? high_frequency_energy(y_lp, cutoff) / hf : 0.0;
  return r;
}

void write_spectral_report(const SpectralReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_spectrum(out_dir / "spectrum_original.png", report.original);
  write_spectrum(out_dir / "spectrum_autoencoded.png", report.autoencoded);
  write_spectrum(out_dir / "spectrum_lowpass.png", report.lowpassed);
  write_spectrum(out_dir / "spectrum_difference.png", report.difference);
  std::ofstream(out_dir / "spectral_report.json") << nlohmann::json{{"cutoff", report.cutoff},
                                                                     {"ae_retention", report.ae_retention},
                                                                     {"lpf_retention", report.lpf_retention}}
                                                         .dump(2)
                                                  << '\n';
}

double proxy_perception(const ImageTensor& sr, const ImageTensor& hr, const ConvFeatureExtractor& extractor,
                        double cutoff) {
  ag::NoGradGuard guard;
  const double distance =
      loss_perceptual(ag::Var(sr.as_batch().tensor()), ag::Var(hr.as_batch().tensor()), extractor).item();
  const double hf_hr = high_frequency_energy(to_y(hr), cutoff);
  const double rho = hf_hr > 0.0 ? high_frequency_energy(to_y(sr), cutoff) / hf_hr : 1.0;
  return -distance * (1.0 + std::abs(1.0 - rho));
}

std::vector<PdRow> pd_curve_emit(const std::vector<PdCheckpoint>& checkpoints, const GeneratorConfig& cfg,
                                 const PairedDataset& dataset, const ConvFeatureExtractor& extractor,
                                 const std::filesystem::path& csv) {
  if (dataset.size() == 0) throw ConfigError("PD curve needs a non-empty evaluation set");
  std::vector<PdRow> rows;
  for (const auto& ck : checkpoints) {
    Generator g(cfg, 0);
    load_checkpoint(g.state(), ck.path);
    PdRow row{ck.id, ck.step, 0.0, 0.0};
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const ImageTensor sr = quantize8(run_network(g, dataset.lr(i)));
      row.psnr += psnr(sr, dataset.hr(i), {.on_y = true, .border = cfg.scale, .quantize = true});
      row.proxy_perception += proxy_perception(sr, dataset.hr(i), extractor);
    }
    row.psnr /= static_cast<double>(dataset.size());
    row.proxy_perception /= static_cast<double>(dataset.size());
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PdRow& a, const PdRow& b) { return a.step < b.step; });
  if (!csv.empty()) {
    CsvWriter out(csv, {"checkpoint", "step", "psnr", "proxy_perception"});
    for (const auto& r : rows) {
      out.row({r.id, std::to_string(r.step), format_number(r.psnr), format_number(r.proxy_perception)});
    }
  }
  return rows;
}

}  // namespace aesop
