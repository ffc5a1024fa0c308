#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "aesop/autograd.hpp"
#include "aesop/dataset.hpp"
#include "aesop/image.hpp"
#include "aesop/networks.hpp"

namespace aesop {

/// Anything that maps an image batch to an estimate of its fidelity bias in
/// image space. Loss and metric code depends only on this surface.
class FidelityBiasEstimator {
 public:
  virtual ~FidelityBiasEstimator() = default;
  /// [N,3,H,W] -> [N,3,H,W].
  virtual ag::Var reconstruct(const ag::Var& x) = 0;
  virtual int scale() const = 0;
  virtual bool frozen() const = 0;
  virtual std::uint64_t checksum() const = 0;

  /// Reconstruction of an image without recording a graph.
  ImageTensor reconstruct(const ImageTensor& img);
};

/// Test double: reconstruct(x) = x.
class IdentityBiasEstimator final : public FidelityBiasEstimator {
 public:
  explicit IdentityBiasEstimator(int scale) : scale_(scale) {}
  ag::Var reconstruct(const ag::Var& x) override { return x; }
  int scale() const override { return scale_; }
  bool frozen() const override { return true; }
  std::uint64_t checksum() const override { return 0; }
  using FidelityBiasEstimator::reconstruct;

 private:
  int scale_;
};

struct AeOutput {
  ag::Var bottleneck;
  ag::Var reconstruction;
};

/// Encoder followed by an RRDB decoder. The bottleneck has exactly the LR
/// dimensions of the input.
class AutoEncoder final : public FidelityBiasEstimator {
 public:
  AutoEncoder(const EncoderConfig& encoder, const GeneratorConfig& decoder, std::uint64_t seed);

  AeOutput forward(const ag::Var& hr);
  /// Unrecorded forward on an image or batch.
  std::pair<ImageTensor, ImageTensor> forward(const ImageTensor& hr);

  ag::Var reconstruct(const ag::Var& x) override { return forward(x).reconstruction; }
  using FidelityBiasEstimator::reconstruct;
  int scale() const override { return encoder_.config().scale; }
  bool frozen() const override { return frozen_; }
  /// Combined checksum of encoder and decoder parameters.
  std::uint64_t checksum() const override;

  /// Flags every parameter frozen. Idempotent. Warns when pretraining never
  /// completed.
  void freeze();
  void unfreeze();

  Encoder& encoder() { return encoder_; }
  Generator& decoder() { return decoder_; }
  const Encoder& encoder() const { return encoder_; }
  const Generator& decoder() const { return decoder_; }

  std::int64_t pretrain_step() const { return pretrain_step_; }
  void set_pretrain_step(std::int64_t step) { pretrain_step_ = step; }
  bool pretrain_complete() const { return pretrain_complete_; }
  void set_pretrain_complete(bool done) { pretrain_complete_ = done; }

  void save(const std::filesystem::path& path) const;
  /// Loads weights and flags; both configs must match the file.
  void load(const std::filesystem::path& path);
  /// Builds an AutoEncoder from the configs stored in a checkpoint.
  static std::unique_ptr<AutoEncoder> from_checkpoint(const std::filesystem::path& path);

 private:
  Encoder encoder_;
  Generator decoder_;
  bool frozen_ = false;
  bool pretrain_complete_ = false;
  std::int64_t pretrain_step_ = 0;
};

struct AePretrainConfig {
  std::int64_t steps = 2000;
  int batch = 8;
  int hr_patch = 64;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  bool augment = true;
  /// Per-step CSV (step,rec_lr,rec_hr,total); empty disables.
  std::filesystem::path log_csv;
  std::int64_t log_interval = 100;
};

struct AeEvaluation {
  /// Mean |decoder(encoder(HR)) - HR|.
  double rec_hr = 0;
  /// Mean |encoder(HR) - LR file|.
  double rec_lr = 0;
  /// Mean |bicubic_downsample(HR) - LR file|, the reference encoder.
  double bicubic_lr = 0;
};

/// Evaluates the AE over whole images of a dataset without recording a graph.
AeEvaluation evaluate_ae(AutoEncoder& ae, const PairedDataset& dataset);

struct AePretrainReport {
  AeEvaluation initial;
  AeEvaluation final;
  std::int64_t steps = 0;
};

/// Minimizes |enc(HR) - down(HR)|_1 + |dec(enc(HR)) - HR|_1 with Adam. The
/// encoder receives gradients from both terms. Leaves the AE frozen.
/// `eval_set` may be empty, in which case evaluations are skipped.
AePretrainReport pretrain_ae(AutoEncoder& ae, const PairedDataset& train, const PairedDataset& eval_set,
                             const AePretrainConfig& cfg);

}  // namespace aesop
