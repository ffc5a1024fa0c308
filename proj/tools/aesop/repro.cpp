#include <fstream>

#include <fmt/format.h>

#include "aesop/autoencoder.hpp"
#include "aesop/config.hpp"
#include "aesop/csv.hpp"
#include "aesop/dataset.hpp"
#include "aesop/diagnostics.hpp"
#include "aesop/errors.hpp"
#include "aesop/log.hpp"
#include "aesop/networks.hpp"
#include "aesop/synthetic.hpp"
#include "aesop/trainer.hpp"
#include "commands.hpp"

namespace aesop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SummaryRow {
  std::string item;
  double value;
  std::string reproduces;
  fs::path artifact;
};

}  // namespace

// Desk-scale recipe: data, fidelity generator, autoencoder, paired baseline
// and AESOP runs from the same initialization, evaluation, diagnostics and
// the SE/VE lab. Each stage writes into its own subdirectory of `out`.
void cmd_repro(json config, const ReproArgs& args) {
  if (args.src.empty()) throw ConfigError("--src is required");
  if (args.out.empty()) throw ConfigError("--out is required");
  fs::create_directories(args.out);
  write_run_files(args.out, config, config["global"]["seed"].get<std::uint64_t>(), "repro");
  std::vector<SummaryRow> rows;

  const fs::path data = args.out / "data";
  cmd_prepare_data(config, {args.src, data, 0});
  const PairedDataset ds = PairedDataset::open(data);
  PairedDataset val = ds.subset(Split::kValidation);
  if (val.size() == 0) val = ds;

  log_info("stage 1/6: fidelity-oriented generator");
  const fs::path fid_dir = args.out / "fidelity";
  FidelityPretrainConfig fcfg = fidelity_config_from(config);
  fcfg.run_dir = fid_dir;
  const FidelityPretrainResult fid = pretrain_fidelity_generator(fcfg, ds.subset(Split::kTrain), val);
  rows.push_back({"fidelity_generator_psnr", fid.final_psnr, "fidelity-oriented initialization", fid_dir});
  rows.push_back({"bicubic_psnr", fid.bicubic_psnr, "interpolation reference", fid_dir});

  log_info("stage 2/6: autoencoder pretraining");
  const fs::path ae_path = args.out / "ae" / "ae.ckpt";
  json ae_config = config;
  ae_config["ae"]["decoder_init"] = fid.checkpoint.string();
  cmd_pretrain_ae(ae_config, {data, ae_path, 0});
  const json ae_report = json::parse(std::ifstream(args.out / "ae" / "ae_report.json"));
  rows.push_back({"ae_rec_hr_initial", ae_report["initial"]["rec_hr"], "autoencoder pretraining", ae_path});
  rows.push_back({"ae_rec_hr_final", ae_report["final"]["rec_hr"], "autoencoder pretraining", ae_path});
  rows.push_back({"ae_rec_lr_final", ae_report["final"]["rec_lr"], "autoencoder pretraining", ae_path});
  rows.push_back({"ae_rec_lr_bicubic", ae_report["bicubic_lr"], "autoencoder pretraining", ae_path});

  auto ae = AutoEncoder::from_checkpoint(ae_path);
  ae->freeze();
  std::map<std::string, SrEvaluation> evals;
  for (const std::string mode : {"baseline", "aesop"}) {
    log_info(fmt::format("stage {}/6: {} SR training", mode == "baseline" ? 3 : 4, mode));
    json run_config = config;
    run_config["train"]["mode"] = mode;
    run_config["train"]["ae_checkpoint"] = ae_path.string();
    run_config["train"]["generator_init"] = fid.checkpoint.string();
    const fs::path run_dir = args.out / mode;
    cmd_train_sr(run_config, {data, run_dir, {}, {}, {}, {}, 0});
    auto g = load_generator(run_dir / "final.ckpt");
    evals[mode] = evaluate_generator(*g, val, ae.get());
    cmd_eval(run_config, {data, run_dir / "final.ckpt", ae_path, args.out / fmt::format("eval_{}.csv", mode), "val"});
  }
  for (const std::string mode : {"baseline", "aesop"}) {
    const SrEvaluation& e = evals[mode];
    const fs::path csv = args.out / fmt::format("eval_{}.csv", mode);
    rows.push_back({mode + "_psnr", e.psnr, "distortion comparison", csv});
    rows.push_back({mode + "_ssim", e.ssim, "distortion comparison", csv});
    rows.push_back({mode + "_lr_psnr", e.lr_psnr, "LR-PSNR and AE-PSNR comparison", csv});
    rows.push_back({mode + "_ae_psnr", e.ae_psnr, "LR-PSNR and AE-PSNR comparison", csv});
  }
  rows.push_back({"lr_psnr_margin", evals["aesop"].lr_psnr - evals["baseline"].lr_psnr,
                  "LR-PSNR and AE-PSNR comparison", args.out});
  rows.push_back({"ae_psnr_margin", evals["aesop"].ae_psnr - evals["baseline"].ae_psnr,
                  "LR-PSNR and AE-PSNR comparison", args.out});

  log_info("stage 5/6: diagnostics");
  const fs::path diag = args.out / "diagnose";
  cmd_diagnose(config, {data, args.out / "aesop" / "final.ckpt", ae_path, args.out / "aesop", diag, ""});
  const int side = 16 * ds.scale() * 4;
  const SpectralReport edge = spectral_report(step_edge_image(side, side), *ae, config["eval"]["cutoff"]);
  rows.push_back({"hf_retention_ae", edge.ae_retention, "autoencoder vs low-pass spectra",
                  diag / "spectrum_step_edge"});
  rows.push_back({"hf_retention_lowpass", edge.lpf_retention, "autoencoder vs low-pass spectra",
                  diag / "spectrum_step_edge"});
  const LossMaps maps = compute_loss_maps(run_network(*load_generator(args.out / "aesop" / "final.ckpt"), val.lr(0)),
                                          val.hr(0), *ae);
  rows.push_back({"loss_map_pixel_mean", maps.pixel_mean, "pixel vs AE-space loss maps", diag / "loss_maps"});
  rows.push_back({"loss_map_aesop_mean", maps.aesop_mean, "pixel vs AE-space loss maps", diag / "loss_maps"});
  rows.push_back({"pd_curve", 0.0, "perception-distortion curve", diag / "pd_curve.csv"});

  log_info("stage 6/6: SE/VE lab");
  const fs::path seve_dir = args.out / "seve";
  cmd_seve_lab(config, {seve_dir, 100});
  const json seve = json::parse(std::ifstream(seve_dir / "seve_summary.json"));
  rows.push_back({"seve_max_closed_form_error", seve["max_closed_form_error"], "SE/VE decomposition",
                  seve_dir / "seve_joints.csv"});
  rows.push_back({"toy_pixel_final_std", seve["toy_pixel"]["final_std"], "toy collapse experiment",
                  seve_dir / "toy_pixel.csv"});
  rows.push_back({"toy_aesop_final_mean_error", seve["toy_aesop"]["final_mean_error"], "toy collapse experiment",
                  seve_dir / "toy_aesop.csv"});
  rows.push_back({"toy_aesop_final_std", seve["toy_aesop"]["final_std"], "toy collapse experiment",
                  seve_dir / "toy_aesop.csv"});

  CsvWriter summary(args.out / "summary.csv", {"item", "value", "reproduces", "artifact"});
  for (const auto& r : rows) {
    summary.row({r.item, format_number(r.value), r.reproduces, fs::relative(r.artifact, args.out).string()});
  }
  summary.flush();
  log_info(fmt::format("summary written to {}", (args.out / "summary.csv").string()));
}

}  // namespace aesop::cli
