#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aesop/autoencoder.hpp"
#include "aesop/dataset.hpp"
#include "aesop/losses.hpp"
#include "aesop/networks.hpp"

namespace aesop {

/// Version string compiled into the library, with the git description when
/// available.
std::string version_string();

/// Writes config.json, VERSION and run.json into `run_dir`, creating it.
void write_run_files(const std::filesystem::path& run_dir, const nlohmann::json& snapshot, std::uint64_t seed,
                     const std::string& kind);

struct FidelityPretrainConfig {
  GeneratorConfig generator;
  std::int64_t steps = 2000;
  int batch = 8;
  int hr_patch = 64;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  bool augment = true;
  std::int64_t log_interval = 100;
  std::filesystem::path run_dir;
  nlohmann::json snapshot = nlohmann::json::object();
};

struct FidelityPretrainResult {
  std::filesystem::path checkpoint;
  /// Mean |G(LR) - HR| on the evaluation set before and after training.
  double initial_l1 = 0;
  double final_l1 = 0;
  double final_psnr = 0;
  double bicubic_psnr = 0;
};

/// Trains the generator with the L1 pixel loss alone and writes
/// <run_dir>/generator.ckpt plus loss.csv (step,pix).
FidelityPretrainResult pretrain_fidelity_generator(const FidelityPretrainConfig& cfg, const PairedDataset& train,
                                                   const PairedDataset& eval_set);

struct TrainRunConfig {
  LossConfig loss;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  ExtractorConfig extractor;
  int hr_patch = 64;
  int batch = 8;
  std::int64_t steps = 2000;
  double lr = 1e-4;
  double lr_d = 1e-4;
  std::uint64_t seed = 0;
  bool augment = true;
  /// Required in aesop mode; must hold a frozen autoencoder of the same scale.
  std::filesystem::path ae_checkpoint;
  /// Optional fidelity-pretrained generator.
  std::filesystem::path generator_init;
  std::int64_t log_interval = 100;
  std::int64_t ckpt_interval = 500;
  std::int64_t sample_interval = 500;
  /// Compare generator and discriminator checksums around each other's
  /// optimizer step.
  bool verify_substeps = true;
  std::filesystem::path run_dir;
  nlohmann::json snapshot = nlohmann::json::object();

  void validate() const;
};

struct TrainResult {
  std::filesystem::path final_checkpoint;
  std::int64_t steps = 0;
  std::uint64_t ae_checksum = 0;
  std::uint64_t extractor_checksum = 0;
  std::vector<LossBreakdown> history;
};

/// Alternating generator/discriminator training.
///
/// Per step: sample an HR batch, synthesize LR by bicubic downsampling,
/// update the generator on the configured objective with the discriminator
/// frozen, then update the discriminator on detached SR images. Writes
/// loss.csv (step,aesop,pix,percep,adv_g,adv_d,artif,total), checkpoints
/// under checkpoints/ and sample grids under samples/. The frozen
/// autoencoder and extractor checksums are re-verified at every checkpoint.
///
/// With `resume`, training continues from that checkpoint of the same run
/// directory; the log is truncated to the checkpoint step first.
TrainResult train_sr(const TrainRunConfig& cfg, const PairedDataset& train,
                     const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Path of the checkpoint written at `step` inside a run directory.
std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, std::int64_t step);

struct SrEvaluation {
  double psnr = 0;
  double ssim = 0;
  double lr_psnr = 0;
  /// Only when an autoencoder is supplied.
  double ae_psnr = 0;
  double pixel_l1 = 0;
  double aesop_l1 = 0;
  std::size_t images = 0;
};

/// Super-resolves every stored LR image of the dataset and averages the
/// metrics (Y channel, border = scale for PSNR/SSIM and AE-PSNR).
SrEvaluation evaluate_generator(Generator& generator, const PairedDataset& dataset, FidelityBiasEstimator* ae);

}  // namespace aesop
