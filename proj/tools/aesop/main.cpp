#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "aesop/config.hpp"
#include "aesop/errors.hpp"
#include "aesop/log.hpp"
#include "aesop/trainer.hpp"
#include "commands.hpp"

namespace {

namespace cli = aesop::cli;

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

void add_common(CLI::App& sub, cli::CommonOptions& o) {
  sub.add_option("--preset", o.preset, "Base configuration: tiny, desk or full")
      ->check(CLI::IsMember(aesop::preset_names()))
      ->capture_default_str();
  sub.add_option("--config", o.config_file, "JSON file merged over the preset");
  sub.add_option("--set", o.overrides, "Override one key, e.g. --set train.lr=2e-4 (repeatable)");
  sub.add_flag("-q,--quiet", o.quiet, "Only print warnings and errors");
  sub.add_flag("-v,--verbose", o.verbose, "Print debug messages");
}

// AESOP_THREADS caps worker threads. Every kernel is single-threaded, so any
// positive value is accepted; malformed values are configuration errors.
void check_thread_env() {
  const char* env = std::getenv("AESOP_THREADS");
  if (!env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) {
    throw aesop::ConfigError(fmt::format("AESOP_THREADS must be a positive integer, got '{}'", env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-resolution training with auto-encoded supervision"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aesop::version_string());

  cli::CommonOptions common;
  cli::PrepareArgs prepare;
  cli::PretrainArgs fidelity;
  cli::PretrainArgs ae;
  cli::TrainArgs train;
  cli::EvalArgs eval;
  cli::DiagnoseArgs diagnose;
  cli::SeveArgs seve;
  cli::ReproArgs repro;
  std::int64_t seed = -1;
  int scale = 0;

  auto* prep = app.add_subcommand("prepare-data", "Build a paired HR/LR dataset from a folder of PNG images");
  add_common(*prep, common);
  prep->add_option("--src", prepare.src, "Folder of source PNG images")->required();
  prep->add_option("--data-dir", prepare.data, "Dataset root to create or audit")->required();
  prep->add_option("--scale", scale, "Downscaling factor (overrides data.scale)");

  auto* fid = app.add_subcommand("pretrain-fidelity", "Train the fidelity-oriented generator with pixel L1");
  add_common(*fid, common);
  fid->add_option("--data-dir", fidelity.data, "Prepared dataset root")->required();
  fid->add_option("--out", fidelity.out, "Run directory")->required();
  fid->add_option("--steps", fidelity.steps, "Training steps (overrides fidelity.steps)");
  fid->add_option("--seed", seed, "Seed (overrides global.seed)");
  fid->add_option("--scale", scale, "Scale factor (overrides data.scale)");

  auto* pae = app.add_subcommand("pretrain-ae", "Pretrain and freeze the autoencoder");
  add_common(*pae, common);
  pae->add_option("--data-dir", ae.data, "Prepared dataset root")->required();
  pae->add_option("--out", ae.out, "Autoencoder checkpoint path; logs are written beside it")->required();
  pae->add_option("--steps", ae.steps, "Training steps (overrides ae.steps)");
  pae->add_option("--seed", seed, "Seed (overrides global.seed)");
  pae->add_option("--scale", scale, "Scale factor (overrides data.scale)");

  auto* tsr = app.add_subcommand("train-sr", "Train the SR generator with the configured objective");
  add_common(*tsr, common);
  tsr->add_option("--data-dir", train.data, "Prepared dataset root")->required();
  tsr->add_option("--out", train.out, "Run directory")->required();
  tsr->add_option("--ae", train.ae, "Frozen autoencoder checkpoint (overrides train.ae_checkpoint)");
  tsr->add_option("--generator-init", train.generator_init, "Fidelity generator checkpoint to start from");
  tsr->add_option("--mode", train.mode, "Objective: baseline or aesop")->check(CLI::IsMember({"baseline", "aesop"}));
  tsr->add_option("--steps", train.steps, "Training steps (overrides train.steps)");
  tsr->add_option("--resume", train.resume, "Checkpoint of this run to continue from");
  tsr->add_option("--seed", seed, "Seed (overrides global.seed)");
  tsr->add_option("--scale", scale, "Scale factor (overrides data.scale)");

  auto* ev = app.add_subcommand("eval", "Per-image PSNR, SSIM, LR-PSNR and AE-PSNR of a generator");
  add_common(*ev, common);
  ev->add_option("--data-dir", eval.data, "Prepared dataset root")->required();
  ev->add_option("--checkpoint", eval.checkpoint, "Generator or SR-run checkpoint")->required();
  ev->add_option("--ae", eval.ae, "Autoencoder checkpoint; enables AE-PSNR");
  ev->add_option("--out", eval.out, "Metric CSV to write")->required();
  ev->add_option("--split", eval.split, "train, val or all")->capture_default_str();
  ev->add_option("--scale", scale, "Scale factor (overrides data.scale)");

  auto* dg = app.add_subcommand("diagnose", "Loss maps, spectra and the perception-distortion curve");
  add_common(*dg, common);
  dg->add_option("--data-dir", diagnose.data, "Prepared dataset root")->required();
  dg->add_option("--ae", diagnose.ae, "Autoencoder checkpoint")->required();
  dg->add_option("--checkpoint", diagnose.checkpoint, "Generator checkpoint for loss maps");
  dg->add_option("--run", diagnose.run, "SR run directory; its step checkpoints form the curve");
  dg->add_option("--image", diagnose.image, "Held-out image id (default: first)");
  dg->add_option("--out", diagnose.out, "Output directory")->required();
  dg->add_option("--scale", scale, "Scale factor (overrides data.scale)");

  auto* sv = app.add_subcommand("seve-lab", "SE/VE decomposition checks and the toy collapse experiment");
  add_common(*sv, common);
  sv->add_option("--out", seve.out, "Output directory")->required();
  sv->add_option("--joints", seve.joints, "Random joint distributions to decompose")->capture_default_str();
  sv->add_option("--seed", seed, "Seed (overrides global.seed)");

  auto* rp = app.add_subcommand("repro", "Run the whole desk-scale recipe and write summary.csv");
  add_common(*rp, common);
  rp->add_option("--src", repro.src, "Folder of source PNG images")->required();
  rp->add_option("--out", repro.out, "Output directory")->required();
  rp->add_option("--seed", seed, "Seed (overrides global.seed)");
  rp->add_option("--scale", scale, "Scale factor (overrides data.scale)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  aesop::set_log_level(common.quiet     ? aesop::LogLevel::kQuiet
                       : common.verbose ? aesop::LogLevel::kDebug
                                        : aesop::LogLevel::kInfo);
  try {
    check_thread_env();
    nlohmann::json config = common.resolve();
    if (seed >= 0) config["global"]["seed"] = seed;
    if (scale > 0) {
      config["data"]["scale"] = scale;
      config["model"]["generator"]["scale"] = scale;
      config["model"]["encoder"]["scale"] = scale;
    }
    if (prep->parsed()) cli::cmd_prepare_data(config, prepare);
    if (fid->parsed()) cli::cmd_pretrain_fidelity(config, fidelity);
    if (pae->parsed()) cli::cmd_pretrain_ae(config, ae);
    if (tsr->parsed()) cli::cmd_train_sr(config, train);
    if (ev->parsed()) cli::cmd_eval(config, eval);
    if (dg->parsed()) cli::cmd_diagnose(config, diagnose);
    if (sv->parsed()) cli::cmd_seve_lab(config, seve);
    if (rp->parsed()) cli::cmd_repro(config, repro);
  } catch (const aesop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const aesop::TrainingAborted& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    if (!e.last_good_checkpoint().empty()) std::cerr << "diagnostics: " << e.last_good_checkpoint() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
