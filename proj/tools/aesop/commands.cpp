#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "aesop/autoencoder.hpp"
#include "aesop/checkpoint.hpp"
#include "aesop/config.hpp"
#include "aesop/csv.hpp"
#include "aesop/dataset.hpp"
#include "aesop/diagnostics.hpp"
#include "aesop/errors.hpp"
#include "aesop/hash.hpp"
#include "aesop/image_io.hpp"
#include "aesop/log.hpp"
#include "aesop/metrics.hpp"
#include "aesop/networks.hpp"
#include "aesop/seve.hpp"
#include "aesop/synthetic.hpp"
#include "aesop/trainer.hpp"

namespace aesop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw ConfigError(fmt::format("{} is required", flag));
}

PairedDataset select_split(const PairedDataset& ds, const std::string& name) {
  if (name == "train") return ds.subset(Split::kTrain);
  if (name == "val") return ds.subset(Split::kValidation);
  return ds;
}

// Validation split, or the whole set when the split is empty.
PairedDataset held_out(const PairedDataset& ds) {
  PairedDataset val = ds.subset(Split::kValidation);
  return val.size() ? val : ds;
}

void check_dataset_scale(const json& config, const PairedDataset& ds) {
  const int want = resample_spec_from(config).scale;
  if (ds.scale() != want) {
    throw ConfigError(fmt::format("dataset {} has scale {}, config data.scale is {}", ds.root().string(), ds.scale(),
                                  want));
  }
}

}  // namespace

json CommonOptions::resolve() const {
  json config = preset_config(preset);
  if (!config_file.empty()) config = merge_config(config, load_config_file(config_file));
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const json& g = config.at("global");
  if (g.at("workers").get<int>() != 1) throw ConfigError("global.workers: only 1 worker is supported");
  if (g.at("device").get<std::string>() != "cpu") throw ConfigError("global.device: only \"cpu\" is supported");
  if (!g.at("deterministic").get<bool>()) {
    log_warning("global.deterministic=false has no effect; every run is deterministic");
  }
  return config;
}

std::string require_split_name(const std::string& name) {
  if (name != "train" && name != "val" && name != "all") {
    throw ConfigError(fmt::format("split must be train, val or all, got '{}'", name));
  }
  return name;
}

void cmd_prepare_data(const json& config, const PrepareArgs& args) {
  require_path(args.src, "--src");
  require_path(args.data, "--data-dir");
  PrepareReport report;
  const PairedDataset ds = prepare_dataset(args.src, args.data, prepare_options_from(config), &report);
  for (const auto& id : report.cropped) log_info(fmt::format("{}: center-cropped to a multiple of the scale", id));
  if (report.written) {
    log_info(fmt::format("prepared {} images ({} newly written) at {}", ds.size(), report.written,
                         args.data.string()));
  } else {
    log_info(fmt::format("dataset at {} already prepared; audited {} pairs, all match", args.data.string(),
                         report.verified));
  }
}

void cmd_pretrain_fidelity(json config, const PretrainArgs& args) {
  require_path(args.data, "--data-dir");
  require_path(args.out, "--out");
  if (args.steps > 0) config["fidelity"]["steps"] = args.steps;
  const PairedDataset ds = PairedDataset::open(args.data);
  check_dataset_scale(config, ds);
  FidelityPretrainConfig cfg = fidelity_config_from(config);
  cfg.run_dir = args.out;
  cfg.snapshot = config;
  const FidelityPretrainResult r = pretrain_fidelity_generator(cfg, ds.subset(Split::kTrain), held_out(ds));
  log_info(fmt::format("generator written to {}; held-out PSNR {:.3f} dB (bicubic {:.3f} dB)", r.checkpoint.string(),
                       r.final_psnr, r.bicubic_psnr));
}

void cmd_pretrain_ae(json config, const PretrainArgs& args) {
  require_path(args.data, "--data-dir");
  require_path(args.out, "--out");
  if (args.steps > 0) config["ae"]["steps"] = args.steps;
  const PairedDataset ds = PairedDataset::open(args.data);
  check_dataset_scale(config, ds);
  AePretrainConfig cfg = ae_config_from(config);
  const fs::path run_dir = args.out.has_parent_path() ? args.out.parent_path() : fs::path(".");
  write_run_files(run_dir, config, cfg.seed, "pretrain-ae");
  cfg.log_csv = run_dir / (args.out.stem().string() + "_loss.csv");

  AutoEncoder ae(encoder_config_from(config), generator_config_from(config), cfg.seed);
  const std::string decoder_init = config["ae"]["decoder_init"].get<std::string>();
  if (!decoder_init.empty()) {
    const auto g = load_generator(decoder_init);
    ae.decoder().state().copy_values_from(g->state());
    log_info(fmt::format("decoder initialized from {}", decoder_init));
  }
  const AePretrainReport r = pretrain_ae(ae, ds.subset(Split::kTrain), held_out(ds), cfg);
  ae.save(args.out);
  std::ofstream(run_dir / (args.out.stem().string() + "_report.json"))
      << json{{"steps", r.steps},
              {"initial", {{"rec_hr", r.initial.rec_hr}, {"rec_lr", r.initial.rec_lr}}},
              {"final", {{"rec_hr", r.final.rec_hr}, {"rec_lr", r.final.rec_lr}}},
              {"bicubic_lr", r.final.bicubic_lr},
              {"checksum", to_hex(ae.checksum())}}
             .dump(2)
      << '\n';
  log_info(fmt::format("autoencoder written to {}; rec_hr {:.5f} -> {:.5f}, rec_lr {:.5f} (bicubic {:.5f})",
                       args.out.string(), r.initial.rec_hr, r.final.rec_hr, r.final.rec_lr, r.final.bicubic_lr));
}

void cmd_train_sr(json config, const TrainArgs& args) {
  require_path(args.data, "--data-dir");
  require_path(args.out, "--out");
  if (args.steps > 0) config["train"]["steps"] = args.steps;
  if (!args.mode.empty()) config["train"]["mode"] = args.mode;
  if (!args.ae.empty()) config["train"]["ae_checkpoint"] = args.ae.string();
  if (!args.generator_init.empty()) config["train"]["generator_init"] = args.generator_init.string();
  const PairedDataset ds = PairedDataset::open(args.data);
  check_dataset_scale(config, ds);
  TrainRunConfig cfg = train_config_from(config);
  cfg.run_dir = args.out;
  cfg.snapshot = config;
  std::optional<fs::path> resume;
  if (!args.resume.empty()) resume = args.resume;
  const TrainResult r = train_sr(cfg, ds.subset(Split::kTrain), resume);
  log_info(fmt::format("finished {} steps; final checkpoint {}", r.steps, r.final_checkpoint.string()));
}

void cmd_eval(const json& config, const EvalArgs& args) {
  require_path(args.data, "--data-dir");
  require_path(args.checkpoint, "--checkpoint");
  require_path(args.out, "--out");
  const PairedDataset ds = select_split(PairedDataset::open(args.data), require_split_name(args.split));
  check_dataset_scale(config, ds);
  auto g = load_generator(args.checkpoint);
  std::unique_ptr<AutoEncoder> ae;
  if (!args.ae.empty()) {
    ae = AutoEncoder::from_checkpoint(args.ae);
    ae->freeze();
  }
  const int s = ds.scale();
  const MetricOptions fid{.on_y = true, .border = s, .quantize = true};
  const json meta = metric_meta(fid);
  std::vector<MetricRecord> records;
  const std::string dataset = ds.root().filename().string() + "/" + args.split;
  const std::string ckpt = args.checkpoint.filename().string();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string id = ds.entries()[i].id;
    const ImageTensor sr = run_network(*g, ds.lr(i));
    records.push_back({"psnr", psnr(sr, ds.hr(i), fid), dataset, id, ckpt, meta});
    records.push_back({"ssim", ssim(sr, ds.hr(i), fid), dataset, id, ckpt, meta});
    records.push_back({"lr_psnr", lr_psnr(sr, ds.lr(i), ds.resample_spec()), dataset, id, ckpt,
                       {{"y_channel", true}, {"border", 1}, {"quantize", true}}});
    if (ae) {
      records.push_back({"ae_psnr", ae_psnr(sr, ds.hr(i), *ae), dataset, id, ckpt,
                         {{"y_channel", true}, {"border", s}, {"quantize", true}}});
    }
  }
  const SrEvaluation summary = evaluate_generator(*g, ds, ae.get());
  write_metric_csv(args.out, records);
  log_info(fmt::format("{} images: PSNR {:.3f} SSIM {:.4f} LR-PSNR {:.3f}{}", summary.images, summary.psnr,
                       summary.ssim, summary.lr_psnr, ae ? fmt::format(" AE-PSNR {:.3f}", summary.ae_psnr) : ""));
}

void cmd_diagnose(const json& config, const DiagnoseArgs& args) {
  require_path(args.data, "--data-dir");
  require_path(args.ae, "--ae");
  require_path(args.out, "--out");
  const PairedDataset all = PairedDataset::open(args.data);
  check_dataset_scale(config, all);
  const PairedDataset ds = held_out(all);
  auto ae = AutoEncoder::from_checkpoint(args.ae);
  ae->freeze();
  const double cutoff = config["eval"]["cutoff"].get<double>();
  fs::create_directories(args.out);

  std::size_t index = 0;
  if (!args.image.empty()) {
    const auto& es = ds.entries();
    const auto it = std::find_if(es.begin(), es.end(), [&](const ManifestEntry& e) { return e.id == args.image; });
    if (it == es.end()) throw ConfigError(fmt::format("no held-out image with id '{}'", args.image));
    index = static_cast<std::size_t>(it - es.begin());
  }

  if (!args.checkpoint.empty()) {
    auto g = load_generator(args.checkpoint);
    const ImageTensor sr = run_network(*g, ds.lr(index));
    const LossMaps maps = export_loss_maps(sr, ds.hr(index), *ae, args.out / "loss_maps");
    log_info(fmt::format("loss maps for {}: pixel {:.5f}, aesop {:.5f}, variance {:.5f}", ds.entries()[index].id,
                         maps.pixel_mean, maps.aesop_mean, maps.variance_mean));
  }

  const int side = 16 * ds.scale() * 4;
  const SpectralReport edge = spectral_report(step_edge_image(side, side), *ae, cutoff);
  write_spectral_report(edge, args.out / "spectrum_step_edge");
  const ImageTensor hr = ds.hr(index);
  const SpectralReport natural = spectral_report(hr, *ae, cutoff);
  write_spectral_report(natural, args.out / "spectrum_image");
  log_info(fmt::format("HF retention on the step edge: AE {:.4f}, ideal low-pass {:.2e}", edge.ae_retention,
                       edge.lpf_retention));

  if (!args.run.empty()) {
    std::vector<PdCheckpoint> ckpts;
    for (const auto& de : fs::directory_iterator(args.run / "checkpoints")) {
      const std::string stem = de.path().stem().string();
      if (de.path().extension() != ".ckpt" || stem.rfind("step_", 0) != 0) continue;
      ckpts.push_back({stem, std::stoll(stem.substr(5)), de.path()});
    }
    if (ckpts.empty()) throw IoError(fmt::format("no step checkpoints under {}", (args.run / "checkpoints").string()));
    const ConvFeatureExtractor extractor(ExtractorConfig::from_json(config["model"]["extractor"]));
    const auto g0 = load_generator(ckpts.front().path);
    pd_curve_emit(ckpts, g0->config(), ds, extractor, args.out / "pd_curve.csv");
    log_info(fmt::format("perception-distortion curve over {} checkpoints written", ckpts.size()));
  }
}

void cmd_seve_lab(const json& config, const SeveArgs& args) {
  require_path(args.out, "--out");
  if (args.joints < 1) throw ConfigError("--joints must be positive");
  fs::create_directories(args.out);
  const auto seed = config["global"]["seed"].get<std::uint64_t>();

  std::mt19937_64 rng(seed);
  CsvWriter joints(args.out / "seve_joints.csv",
                   {"joint", "support_y", "support_yhat", "dim", "expected_loss", "se", "ve", "se_closed",
                    "ve_closed", "max_abs_error"});
  double worst = 0.0;
  for (int i = 0; i < args.joints; ++i) {
    const seve::DiscreteJointDistribution d = seve::random_independent_joint(rng);
    const seve::BiasOperatorResult r = seve::decompose_se_ve(d, seve::BiasLoss::kL2);
    const double err = std::max(std::abs(r.se - r.se_closed), std::abs(r.ve - r.ve_closed));
    worst = std::max(worst, err);
    joints.row({std::to_string(i), std::to_string(d.support_y.size()), std::to_string(d.support_yhat.size()),
                std::to_string(d.support_y.front().size()), format_number(seve::expected_loss(d, seve::BiasLoss::kL2)),
                format_number(r.se), format_number(r.ve), format_number(r.se_closed), format_number(r.ve_closed),
                format_number(err)});
  }
  joints.flush();

  const seve::ToyInverseProblem problem = toy_problem_from(config);
  const seve::ToyRunConfig run = toy_run_from(config);
  const seve::ToyReport pixel = seve::run_toy_experiment(problem, seve::ToyLossMode::kPixel, run, seed);
  const seve::ToyReport aesop = seve::run_toy_experiment(problem, seve::ToyLossMode::kAesopAnalytic, run, seed);
  seve::write_toy_csv(pixel, args.out / "toy_pixel.csv");
  seve::write_toy_csv(aesop, args.out / "toy_aesop.csv");
  std::ofstream(args.out / "seve_summary.json")
      << json{{"joints", args.joints},
              {"max_closed_form_error", worst},
              {"toy_pixel", {{"final_std", pixel.final_std}, {"final_mean_error", pixel.final_mean_error},
                             {"initial_std", pixel.initial_std}}},
              {"toy_aesop", {{"final_std", aesop.final_std}, {"final_mean_error", aesop.final_mean_error},
                             {"initial_std", aesop.initial_std}}}}
             .dump(2)
      << '\n';
  log_info(fmt::format("{} joints: max closed-form error {:.3e}", args.joints, worst));
  log_info(fmt::format("toy pixel loss: std {:.4f} -> {:.4f}; toy aesop loss: |mean error| {:.4f}, std {:.4f} -> {:.4f}",
                       pixel.initial_std, pixel.final_std, std::abs(aesop.final_mean_error), aesop.initial_std,
                       aesop.final_std));
}

}  // namespace aesop::cli
