#include "aesop/autoencoder.hpp"

#include <cmath>

#include <fmt/format.h>

#include "aesop/checkpoint.hpp"
#include "aesop/csv.hpp"
#include "aesop/errors.hpp"
#include "aesop/hash.hpp"
#include "aesop/log.hpp"
#include "aesop/ops.hpp"
#include "aesop/optim.hpp"
#include "aesop/resample.hpp"

namespace aesop {

namespace {

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean absolute difference");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

ImageTensor FidelityBiasEstimator::reconstruct(const ImageTensor& img) {
  ag::NoGradGuard guard;
  const ImageTensor b = img.as_batch();
  ImageTensor out(reconstruct(ag::Var(b.tensor())).value(), ColorSpace::kRGB);
  return img.batched() ? out : out.item(0);
}

AutoEncoder::AutoEncoder(const EncoderConfig& encoder, const GeneratorConfig& decoder, std::uint64_t seed)
    : encoder_(encoder, seed), decoder_(decoder, seed + 1) {
  if (encoder.scale != decoder.scale) {
    throw ConfigError(fmt::format("encoder scale {} differs from decoder scale {}", encoder.scale, decoder.scale));
  }
}

AeOutput AutoEncoder::forward(const ag::Var& hr) {
  AeOutput out;
  out.bottleneck = encoder_.forward(hr);
  out.reconstruction = decoder_.forward(out.bottleneck);
  return out;
}

std::pair<ImageTensor, ImageTensor> AutoEncoder::forward(const ImageTensor& hr) {
  ag::NoGradGuard guard;
  const AeOutput o = forward(ag::Var(hr.as_batch().tensor()));
  ImageTensor bottleneck(o.bottleneck.value(), ColorSpace::kRGB);
  ImageTensor recon(o.reconstruction.value(), ColorSpace::kRGB);
  if (hr.batched()) return {bottleneck, recon};
  return {bottleneck.item(0), recon.item(0)};
}

std::uint64_t AutoEncoder::checksum() const {
  Fnv1a h;
  const std::uint64_t parts[2] = {encoder_.state().checksum(), decoder_.state().checksum()};
  h.update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(parts), sizeof(parts)));
  return h.digest();
}

void AutoEncoder::freeze() {
  if (!pretrain_complete_ && !frozen_) log_warning("freezing an autoencoder whose pretraining did not complete");
  encoder_.state().set_frozen(true);
  decoder_.state().set_frozen(true);
  frozen_ = true;
}

void AutoEncoder::unfreeze() {
  encoder_.state().set_frozen(false);
  decoder_.state().set_frozen(false);
  frozen_ = false;
}

void AutoEncoder::save(const std::filesystem::path& path) const {
  Checkpoint ck;
  ck.meta = {{"kind", "autoencoder"},
             {"frozen", frozen_},
             {"pretrain_step", pretrain_step_},
             {"pretrain_complete", pretrain_complete_}};
  ck.sections.push_back(encoder_.state().to_section("encoder"));
  ck.sections.push_back(decoder_.state().to_section("decoder"));
  ck.save(path);
}

void AutoEncoder::load(const std::filesystem::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.meta.value("kind", "") != "autoencoder") throw IoError(path.string() + " is not an autoencoder checkpoint");
  encoder_.state().load_section(ck.section("encoder"));
  decoder_.state().load_section(ck.section("decoder"));
  frozen_ = ck.meta.value("frozen", false);
  pretrain_step_ = ck.meta.value("pretrain_step", std::int64_t{0});
  pretrain_complete_ = ck.meta.value("pretrain_complete", false);
  encoder_.state().set_frozen(frozen_);
  decoder_.state().set_frozen(frozen_);
}

std::unique_ptr<AutoEncoder> AutoEncoder::from_checkpoint(const std::filesystem::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.meta.value("kind", "") != "autoencoder") throw IoError(path.string() + " is not an autoencoder checkpoint");
  const auto enc = EncoderConfig::from_json(ck.section("encoder").meta.at("config"));
  const auto dec = GeneratorConfig::from_json(ck.section("decoder").meta.at("config"));
  auto ae = std::make_unique<AutoEncoder>(enc, dec, 0);
  ae->load(path);
  return ae;
}

AeEvaluation evaluate_ae(AutoEncoder& ae, const PairedDataset& dataset) {
  AeEvaluation ev;
  if (dataset.size() == 0) return ev;
  ResampleSpec spec = dataset.resample_spec();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ImageTensor& hr = dataset.hr(i);
    const ImageTensor& lr = dataset.lr(i);
    const auto [bottleneck, recon] = ae.forward(hr);
    ev.rec_hr += mean_abs_diff(recon.tensor(), hr.tensor());
    ev.rec_lr += mean_abs_diff(bottleneck.tensor(), lr.tensor());
    ev.bicubic_lr += mean_abs_diff(bicubic_downsample(hr, spec).tensor(), lr.tensor());
  }
  const double n = static_cast<double>(dataset.size());
  ev.rec_hr /= n;
  ev.rec_lr /= n;
  ev.bicubic_lr /= n;
  return ev;
}

AePretrainReport pretrain_ae(AutoEncoder& ae, const PairedDataset& train, const PairedDataset& eval_set,
                             const AePretrainConfig& cfg) {
  if (ae.frozen()) throw FreezeViolation("cannot pretrain a frozen autoencoder");
  if (train.scale() != ae.scale()) {
    throw ConfigError(fmt::format("dataset scale {} differs from autoencoder scale {}", train.scale(), ae.scale()));
  }
  AePretrainReport report;
  report.initial = evaluate_ae(ae, eval_set);

  PatchSampler sampler(train, cfg.hr_patch, cfg.batch, cfg.augment, cfg.seed);
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  Adam enc_opt(ae.encoder().state(), adam_cfg);
  Adam dec_opt(ae.decoder().state(), adam_cfg);
  std::unique_ptr<CsvWriter> log;
  if (!cfg.log_csv.empty()) {
    log = std::make_unique<CsvWriter>(cfg.log_csv, std::vector<std::string>{"step", "rec_lr", "rec_hr", "total"});
  }

  const ResampleSpec spec = train.resample_spec();
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const PatchBatch batch = sampler.next();
    const ag::Var hr(batch.hr.tensor());
    const ag::Var lr_target(bicubic_downsample(batch.hr.tensor(), spec));
    const AeOutput out = ae.forward(hr);
    const ag::Var rec_lr = ag::mean_lp(out.bottleneck, lr_target, 1);
    const ag::Var rec_hr = ag::mean_lp(out.reconstruction, hr, 1);
    const ag::Var total = ag::add(rec_lr, rec_hr);
    if (!std::isfinite(total.item())) {
      throw TrainingAborted(fmt::format("non-finite autoencoder loss at step {} (rec_lr={}, rec_hr={})", step,
                                        rec_lr.item(), rec_hr.item()),
                            step, "");
    }
    ag::backward(total);
    enc_opt.step();
    dec_opt.step();
    ae.encoder().state().zero_grad();
    ae.decoder().state().zero_grad();
    ae.set_pretrain_step(step);
    if (log) log->row({std::to_string(step), format_number(rec_lr.item()), format_number(rec_hr.item()),
                       format_number(total.item())});
    if (cfg.log_interval > 0 && step % cfg.log_interval == 0) {
      log_info(fmt::format("ae step {}/{}: rec_lr={:.5f} rec_hr={:.5f}", step, cfg.steps, rec_lr.item(),
                           rec_hr.item()));
    }
  }
  report.steps = cfg.steps;
  ae.encoder().state().set_training_step(cfg.steps);
  ae.decoder().state().set_training_step(cfg.steps);
  ae.set_pretrain_complete(true);
  ae.freeze();
  report.final = evaluate_ae(ae, eval_set);
  return report;
}

}  // namespace aesop
