#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aesop::cli {

/// Options shared by every subcommand: config layering and verbosity.
struct CommonOptions {
  std::string preset = "desk";
  std::filesystem::path config_file;
  std::vector<std::string> overrides;  // "key.path=value"
  bool quiet = false;
  bool verbose = false;

  /// preset, then config file, then --set overrides. Throws ConfigError.
  nlohmann::json resolve() const;
};

struct PrepareArgs {
  std::filesystem::path src;
  std::filesystem::path data;
  int scale = 0;
};

struct PretrainArgs {
  std::filesystem::path data;
  std::filesystem::path out;
  std::int64_t steps = 0;
};

struct TrainArgs {
  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path ae;
  std::filesystem::path generator_init;
  std::filesystem::path resume;
  std::string mode;
  std::int64_t steps = 0;
};

struct EvalArgs {
  std::filesystem::path data;
  std::filesystem::path checkpoint;
  std::filesystem::path ae;
  std::filesystem::path out;
  std::string split = "val";
};

struct DiagnoseArgs {
  std::filesystem::path data;
  std::filesystem::path checkpoint;
  std::filesystem::path ae;
  std::filesystem::path run;
  std::filesystem::path out;
  std::string image;
};

struct SeveArgs {
  std::filesystem::path out;
  int joints = 100;
};

struct ReproArgs {
  std::filesystem::path src;
  std::filesystem::path out;
};

// Each returns normally on success and throws aesop::Error otherwise.
void cmd_prepare_data(const nlohmann::json& config, const PrepareArgs& args);
void cmd_pretrain_fidelity(nlohmann::json config, const PretrainArgs& args);
void cmd_pretrain_ae(nlohmann::json config, const PretrainArgs& args);
void cmd_train_sr(nlohmann::json config, const TrainArgs& args);
void cmd_eval(const nlohmann::json& config, const EvalArgs& args);
void cmd_diagnose(const nlohmann::json& config, const DiagnoseArgs& args);
void cmd_seve_lab(const nlohmann::json& config, const SeveArgs& args);
void cmd_repro(nlohmann::json config, const ReproArgs& args);

/// Dataset split selected by name: "train", "val" or "all".
std::string require_split_name(const std::string& name);

}  // namespace aesop::cli
