#include "aesop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "aesop/checkpoint.hpp"
#include "aesop/csv.hpp"
#include "aesop/errors.hpp"
#include "aesop/hash.hpp"
#include "aesop/image_io.hpp"
#include "aesop/log.hpp"
#include "aesop/metrics.hpp"
#include "aesop/ops.hpp"
#include "aesop/optim.hpp"
#include "aesop/resample.hpp"

#ifndef AESOP_VERSION
#define AESOP_VERSION "unknown"
#endif
#ifndef AESOP_GIT_DESCRIBE
#define AESOP_GIT_DESCRIBE ""
#endif

namespace aesop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kLossColumns = {"step", "aesop", "pix", "percep", "adv_g", "adv_d", "artif", "total"};

std::vector<std::string> loss_row(const LossBreakdown& b) {
  return {std::to_string(b.step), format_number(b.aesop), format_number(b.pix),  format_number(b.percep),
          format_number(b.adv_g), format_number(b.adv_d), format_number(b.artif), format_number(b.total)};
}

ImageTensor sample_grid(const ImageTensor& lr, const ImageTensor& sr, const ImageTensor& hr, int scale) {
  const ImageTensor up = bicubic_upsample(lr, ResampleSpec{.scale = scale});
  const int h = hr.height(), w = hr.width();
  ImageTensor grid = ImageTensor::rgb(h, 3 * w);
  const ImageTensor* parts[3] = {&up, &sr, &hr};
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) grid.at(c, y, p * w + x) = std::clamp(parts[p]->at(c, y, x), 0.0, 1.0);
  return grid;
}

double mean_abs(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

void require_finite(double v, const char* what, std::int64_t step, const std::string& last_good) {
  if (!std::isfinite(v)) {
    throw TrainingAborted(fmt::format("non-finite {} at step {}; last good checkpoint: {}", what, step,
                                      last_good.empty() ? "none" : last_good),
                          step, last_good);
  }
}

}  // namespace

void write_run_files(const fs::path& run_dir, const json& snapshot, std::uint64_t seed, const std::string& kind) {
  fs::create_directories(run_dir);
  std::ofstream(run_dir / "config.json") << snapshot.dump(2) << '\n';
  std::ofstream(run_dir / "VERSION") << version_string() << '\n';
  std::ofstream(run_dir / "run.json") << json{{"kind", kind}, {"seed", seed}, {"version", version_string()}}.dump(2)
                                      << '\n';
}

std::string version_string() {
  const std::string git = AESOP_GIT_DESCRIBE;
  return git.empty() ? std::string(AESOP_VERSION) : fmt::format("{} ({})", AESOP_VERSION, git);
}

fs::path checkpoint_path(const fs::path& run_dir, std::int64_t step) {
  return run_dir / "checkpoints" / fmt::format("step_{:08d}.ckpt", step);
}

FidelityPretrainResult pretrain_fidelity_generator(const FidelityPretrainConfig& cfg, const PairedDataset& train,
                                                   const PairedDataset& eval_set) {
  if (cfg.run_dir.empty()) throw ConfigError("fidelity pretraining needs a run directory");
  if (train.scale() != cfg.generator.scale) throw ConfigError("dataset scale differs from generator scale");
  write_run_files(cfg.run_dir, cfg.snapshot, cfg.seed, "pretrain-fidelity");
  Generator g(cfg.generator, cfg.seed);
  FidelityPretrainResult result;
  const auto eval_l1 = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      s += mean_abs(run_network(g, eval_set.lr(i)).tensor(), eval_set.hr(i).tensor());
    }
    return eval_set.size() ? s / static_cast<double>(eval_set.size()) : 0.0;
  };
  result.initial_l1 = eval_l1();

  PatchSampler sampler(train, cfg.hr_patch, cfg.batch, cfg.augment, cfg.seed);
  Adam opt(g.state(), AdamConfig{.lr = cfg.lr});
  CsvWriter log(cfg.run_dir / "loss.csv", {"step", "pix"});
  const ResampleSpec spec = train.resample_spec();
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const PatchBatch batch = sampler.next();
    const ag::Var hr(batch.hr.tensor());
    const ag::Var lr(bicubic_downsample(batch.hr.tensor(), spec));
    const ag::Var loss = loss_pix(g.forward(lr), hr, 1);
    require_finite(loss.item(), "pixel loss", step, "");
    ag::backward(loss);
    opt.step();
    g.state().zero_grad();
    log.row({std::to_string(step), format_number(loss.item())});
    if (cfg.log_interval > 0 && step % cfg.log_interval == 0) {
      log_info(fmt::format("fidelity step {}/{}: pix={:.5f}", step, cfg.steps, loss.item()));
    }
  }
  g.state().set_training_step(cfg.steps);
  result.checkpoint = cfg.run_dir / "generator.ckpt";
  save_checkpoint(g.state(), result.checkpoint);
  result.final_l1 = eval_l1();
  if (eval_set.size()) {
    const SrEvaluation ev = evaluate_generator(g, eval_set, nullptr);
    result.final_psnr = ev.psnr;
    double bic = 0.0;
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      bic += psnr(bicubic_upsample(eval_set.lr(i), spec), eval_set.hr(i),
                  {.on_y = true, .border = spec.scale, .quantize = true});
    }
    result.bicubic_psnr = bic / static_cast<double>(eval_set.size());
  }
  return result;
}

void TrainRunConfig::validate() const {
  loss.validate();
  generator.validate();
  discriminator.validate();
  extractor.validate();
  if (hr_patch <= 0 || hr_patch % generator.scale != 0) {
    throw ConfigError(
        fmt::format("hr_patch {} must be a positive multiple of the scale {}", hr_patch, generator.scale));
  }
  if (batch < 1) throw ConfigError("batch must be positive");
  if (steps < 0) throw ConfigError("steps must be non-negative");
  if (run_dir.empty()) throw ConfigError("training needs a run directory");
  if (loss.mode == ObjectiveMode::kAesop && loss.lambda_aesop != 0.0 && ae_checkpoint.empty()) {
    throw ConfigError("aesop mode requires a frozen autoencoder checkpoint (train.ae_checkpoint)");
  }
  if (hr_patch < discriminator.min_patch() || hr_patch % discriminator.min_patch() != 0) {
    throw ConfigError(fmt::format("hr_patch {} must be a multiple of the discriminator minimum {}", hr_patch,
                                  discriminator.min_patch()));
  }
}

TrainResult train_sr(const TrainRunConfig& cfg, const PairedDataset& train, const std::optional<fs::path>& resume) {
  cfg.validate();
  if (train.scale() != cfg.generator.scale) {
    throw ConfigError(fmt::format("dataset scale {} differs from generator scale {}", train.scale(),
                                  cfg.generator.scale));
  }
  const ResampleSpec spec = train.resample_spec();

  std::unique_ptr<Generator> g;
  if (!cfg.generator_init.empty() && !resume) {
    g = build_generator(cfg.generator, GeneratorInit::kPretrainedCheckpoint, cfg.seed, cfg.generator_init);
  } else {
    g = build_generator(cfg.generator, GeneratorInit::kRandom, cfg.seed);
  }
  Discriminator d(cfg.discriminator, cfg.seed + 17);
  ConvFeatureExtractor extractor(cfg.extractor);

  std::unique_ptr<AutoEncoder> ae;
  if (!cfg.ae_checkpoint.empty()) {
    ae = AutoEncoder::from_checkpoint(cfg.ae_checkpoint);
    if (!ae->frozen()) throw FreezeViolation("autoencoder checkpoint is not frozen: " + cfg.ae_checkpoint.string());
    if (ae->scale() != cfg.generator.scale) {
      throw ConfigError(
          fmt::format("autoencoder scale {} differs from run scale {}", ae->scale(), cfg.generator.scale));
    }
  }
  const std::uint64_t ae_checksum = ae ? ae->checksum() : 0;
  const std::uint64_t extractor_checksum = extractor.state().checksum();

  Adam opt_g(g->state(), AdamConfig{.lr = cfg.lr});
  Adam opt_d(d.state(), AdamConfig{.lr = cfg.lr_d});
  PatchSampler sampler(train, cfg.hr_patch, cfg.batch, cfg.augment, cfg.seed);

  std::int64_t start = 0;
  std::string last_good;
  const fs::path log_path = cfg.run_dir / "loss.csv";
  if (resume) {
    const Checkpoint ck = Checkpoint::load(*resume);
    if (ck.meta.value("kind", "") != "sr-run") throw IoError(resume->string() + " is not a training checkpoint");
    g->state().load_section(ck.section("model"));
    d.state().load_section(ck.section("discriminator"));
    opt_g.load_section(ck.section("adam_g"));
    opt_d.load_section(ck.section("adam_d"));
    sampler.set_rng_state(ck.meta.at("sampler_rng").get<std::string>());
    start = ck.meta.at("step").get<std::int64_t>();
    if (ck.meta.value("mode", "") != to_string(cfg.loss.mode)) {
      throw ConfigError("resume checkpoint was written by a run with a different objective mode");
    }
    if (fs::exists(log_path)) truncate_csv(log_path, start);
    last_good = resume->string();
    log_info(fmt::format("resuming from step {}", start));
  } else {
    write_run_files(cfg.run_dir, cfg.snapshot, cfg.seed, fmt::format("train-sr/{}", to_string(cfg.loss.mode)));
  }
  CsvWriter log(log_path, kLossColumns, resume.has_value());

  const auto verify_frozen = [&](std::int64_t step) {
    if (ae && ae->checksum() != ae_checksum) {
      throw FreezeViolation(fmt::format("autoencoder checksum drifted by step {} ({} -> {})", step,
                                        to_hex(ae_checksum), to_hex(ae->checksum())));
    }
    if (extractor.state().checksum() != extractor_checksum) {
      throw FreezeViolation(fmt::format("feature extractor checksum drifted by step {}", step));
    }
  };
  const auto save = [&](std::int64_t step) {
    verify_frozen(step);
    Checkpoint ck;
    ck.meta = {{"kind", "sr-run"},
               {"step", step},
               {"mode", std::string(to_string(cfg.loss.mode))},
               {"sampler_rng", sampler.rng_state()},
               {"ae_fnv1a", to_hex(ae_checksum)},
               {"extractor_fnv1a", to_hex(extractor_checksum)},
               {"version", version_string()}};
    g->state().set_training_step(step);
    d.state().set_training_step(step);
    ck.sections.push_back(g->state().to_section("model"));
    ck.sections.push_back(d.state().to_section("discriminator"));
    ck.sections.push_back(opt_g.to_section("adam_g"));
    ck.sections.push_back(opt_d.to_section("adam_d"));
    const fs::path path = checkpoint_path(cfg.run_dir, step);
    ck.save(path);
    last_good = path.string();
    return path;
  };

  TrainResult result;
  result.ae_checksum = ae_checksum;
  result.extractor_checksum = extractor_checksum;
  const bool train_d = cfg.loss.lambda_adv != 0.0;

  for (std::int64_t step = start + 1; step <= cfg.steps; ++step) {
    const PatchBatch batch = sampler.next();
    const ag::Var hr(batch.hr.tensor());
    const ag::Var lr(bicubic_downsample(batch.hr.tensor(), spec));

    // Generator step with the discriminator frozen.
    d.state().set_frozen(true);
    d.set_power_iteration(false);
    const std::uint64_t d_before = cfg.verify_substeps ? d.state().checksum() : 0;
    const ag::Var sr = g->forward(lr);
    LossInputs in{sr, hr, ae.get(), &extractor, &d};
    GeneratorObjective obj = total_loss(cfg.loss, in);
    LossBreakdown& b = obj.breakdown;
    b.step = step;
    require_finite(b.total, "generator loss", step, last_good);
    ag::backward(obj.total);
    opt_g.step();
    g->state().zero_grad();
    if (cfg.verify_substeps && d.state().checksum() != d_before) {
      throw FreezeViolation(fmt::format("discriminator changed during the generator step {}", step));
    }

    // Discriminator step on detached SR.
    if (train_d) {
      d.state().set_frozen(false);
      d.set_power_iteration(true);
      const std::uint64_t g_before = cfg.verify_substeps ? g->state().checksum() : 0;
      const AdversarialLoss adv = loss_adversarial(sr.detach(), hr, d, false);
      b.adv_d = adv.d.item();
      require_finite(b.adv_d, "discriminator loss", step, last_good);
      ag::backward(adv.d);
      opt_d.step();
      d.state().zero_grad();
      if (cfg.verify_substeps && g->state().checksum() != g_before) {
        throw FreezeViolation(fmt::format("generator changed during the discriminator step {}", step));
      }
    }

    log.row(loss_row(b));
    result.history.push_back(b);
    if (cfg.log_interval > 0 && step % cfg.log_interval == 0) {
      log.flush();
      log_info(fmt::format("{} step {}/{}: total={:.5f} aesop={:.5f} pix={:.5f} percep={:.5f} adv_g={:.4f} "
                           "adv_d={:.4f} artif={:.6f}",
                           to_string(cfg.loss.mode), step, cfg.steps, b.total, b.aesop, b.pix, b.percep, b.adv_g,
                           b.adv_d, b.artif));
    }
    if (cfg.sample_interval > 0 && step % cfg.sample_interval == 0) {
      write_png(cfg.run_dir / "samples" / fmt::format("step_{:08d}.png", step),
                sample_grid(ImageTensor(lr.value(), ColorSpace::kRGB).item(0),
                            ImageTensor(sr.value(), ColorSpace::kRGB).item(0), batch.hr.item(0), spec.scale));
    }
    if (cfg.ckpt_interval > 0 && step % cfg.ckpt_interval == 0 && step != cfg.steps) save(step);
  }
  log.flush();
  const fs::path final_path = save(cfg.steps);
  fs::copy_file(final_path, cfg.run_dir / "final.ckpt", fs::copy_options::overwrite_existing);
  result.final_checkpoint = cfg.run_dir / "final.ckpt";
  result.steps = cfg.steps;
  return result;
}

SrEvaluation evaluate_generator(Generator& generator, const PairedDataset& dataset, FidelityBiasEstimator* ae) {
  SrEvaluation ev;
  const ResampleSpec spec = dataset.resample_spec();
  const MetricOptions opts{.on_y = true, .border = spec.scale, .quantize = true};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ImageTensor& hr = dataset.hr(i);
    const ImageTensor sr = run_network(generator, dataset.lr(i));
    ev.psnr += psnr(sr, hr, opts);
    ev.ssim += ssim(sr, hr, opts);
    ev.lr_psnr += lr_psnr(sr, dataset.lr(i), spec);
    ev.pixel_l1 += mean_abs(sr.tensor(), hr.tensor());
    if (ae) {
      ev.ae_psnr += ae_psnr(sr, hr, *ae);
      ev.aesop_l1 += mean_abs(ae->reconstruct(sr).tensor(), ae->reconstruct(hr).tensor());
    }
  }
  ev.images = dataset.size();
  if (ev.images) {
    const double n = static_cast<double>(ev.images);
    ev.psnr /= n;
    ev.ssim /= n;
    ev.lr_psnr /= n;
    ev.ae_psnr /= n;
    ev.pixel_l1 /= n;
    ev.aesop_l1 /= n;
  }
  return ev;
}

}  // namespace aesop
