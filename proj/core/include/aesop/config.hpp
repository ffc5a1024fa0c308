#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aesop/autoencoder.hpp"
#include "aesop/dataset.hpp"
#include "aesop/seve.hpp"
#include "aesop/trainer.hpp"

namespace aesop {

/// Names accepted by preset_config.
std::vector<std::string> preset_names();

/// Complete run configuration of a preset: "tiny" (smoke and acceptance
/// scale), "desk" (minutes-to-hours on one machine) or "full" (published
/// training lengths and widths). Every valid key appears in every preset.
nlohmann::json preset_config(const std::string& name);

/// Applies `overrides` on top of `base`. Throws ConfigError naming the
/// dotted key path of any key that `base` does not have, or whose value type
/// differs (integers are accepted where reals are expected).
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& overrides);

/// Reads a JSON config file. Throws ConfigError on syntax errors.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Sets a dotted key ("train.steps") from command-line text, parsing it as
/// JSON when possible and as a string otherwise. Unknown keys are rejected.
void set_config_value(nlohmann::json& config, const std::string& dotted_key, const std::string& text);

// Typed views. Each throws ConfigError on invalid values.
ResampleSpec resample_spec_from(const nlohmann::json& config);
PrepareOptions prepare_options_from(const nlohmann::json& config);
GeneratorConfig generator_config_from(const nlohmann::json& config);
EncoderConfig encoder_config_from(const nlohmann::json& config);
FidelityPretrainConfig fidelity_config_from(const nlohmann::json& config);
AePretrainConfig ae_config_from(const nlohmann::json& config);
TrainRunConfig train_config_from(const nlohmann::json& config);
seve::ToyInverseProblem toy_problem_from(const nlohmann::json& config);
seve::ToyRunConfig toy_run_from(const nlohmann::json& config);

}  // namespace aesop
