#include "aesop/config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

using nlohmann::json;

namespace {

struct PresetScale {
  int scale;
  int hr_patch;
  int batch;
  json generator;
  int encoder_channels;
  int disc_channels;
  std::int64_t fidelity_steps;
  std::int64_t ae_steps;
  std::int64_t sr_steps;
};

PresetScale preset_scale(const std::string& name) {
  if (name == "tiny") {
    return {2, 32, 4, {{"num_rrdb_blocks", 2}, {"base_channels", 16}, {"growth_channels", 8}}, 16, 16, 1000, 2000, 2000};
  }
  if (name == "desk") {
    return {4, 64, 8, {{"num_rrdb_blocks", 4}, {"base_channels", 32}, {"growth_channels", 16}}, 32, 32, 2000, 2000, 2000};
  }
  if (name == "full") {
    return {4,  128, 16, {{"num_rrdb_blocks", 23}, {"base_channels", 64}, {"growth_channels", 32}}, 64, 64, 300000,
            100000, 300000};
  }
  throw ConfigError(fmt::format("unknown preset '{}' (expected tiny, desk or full)", name));
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // Reals accept integers; integers require integers.
    return a.is_number_float() || !b.is_number_float();
  }
  return a.type() == b.type();
}

void merge_into(json& base, const json& overrides, const std::string& prefix) {
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(fmt::format("unknown config key '{}'", key));
    json& slot = base[it.key()];
    if (slot.is_object()) {
      if (!it->is_object()) throw ConfigError(fmt::format("config key '{}' must be a section", key));
      merge_into(slot, *it, key);
      continue;
    }
    if (!same_kind(slot, *it)) {
      throw ConfigError(fmt::format("config key '{}' expects a {} value, got {}", key, slot.type_name(),
                                    it->type_name()));
    }
    slot = slot.is_number_float() && it->is_number() ? json(it->get<double>()) : *it;
  }
}

const json& section(const json& config, const char* name) {
  if (!config.contains(name)) throw ConfigError(fmt::format("config has no '{}' section", name));
  return config.at(name);
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

}  // namespace

std::vector<std::string> preset_names() { return {"tiny", "desk", "full"}; }

json preset_config(const std::string& name) {
  const PresetScale p = preset_scale(name);
  json g = p.generator;
  g["scale"] = p.scale;
  return {
      {"global", {{"preset", name}, {"seed", 0}, {"output_dir", "runs"}, {"device", "cpu"}, {"deterministic", true},
                  {"workers", 1}}},
      {"data",
       {{"source_dir", ""}, {"root", ""}, {"scale", p.scale}, {"kernel_a", -0.5}, {"antialias", true},
        {"val_period", 10}}},
      {"model",
       {{"generator", g},
        {"encoder", {{"scale", p.scale}, {"rrdb_channels", p.encoder_channels}}},
        {"discriminator", {{"base_channels", p.disc_channels}, {"num_downsamples", 3}}},
        {"extractor",
         {{"channels", {8, 8, 16, 16, 16}}, {"strides", {1, 2, 1, 2, 1}}, {"feature_layers", {1, 3, 4}},
          {"seed", 20240611}}}}},
      {"fidelity",
       {{"steps", p.fidelity_steps}, {"batch", p.batch}, {"hr_patch", p.hr_patch}, {"lr", 1e-4}, {"augment", true},
        {"log_interval", 100}}},
      {"ae",
       {{"steps", p.ae_steps}, {"batch", p.batch}, {"hr_patch", p.hr_patch}, {"lr", 1e-4}, {"augment", true},
        {"log_interval", 100}, {"decoder_init", ""}}},
      {"train",
       {{"mode", "aesop"}, {"steps", p.sr_steps}, {"batch", p.batch}, {"hr_patch", p.hr_patch}, {"lr", 1e-4},
        {"lr_d", 1e-4}, {"augment", true}, {"ae_checkpoint", ""}, {"generator_init", ""}, {"log_interval", 100},
        {"ckpt_interval", 500}, {"sample_interval", 500}, {"verify_substeps", true},
        {"loss",
         {{"lambda_aesop", 1.0}, {"lambda_pix", 0.01}, {"lambda_percep", 1.0}, {"lambda_adv", 0.005},
          {"lambda_artif", 1.0}, {"p", 1}}}}},
      {"eval", {{"cutoff", 0.125}, {"max_images", 0}}},
      {"seve",
       {{"steps", 2000}, {"batch", 128}, {"lr", 0.02}, {"hidden", 16}, {"init_offset", 0.5}, {"init_std", 1.0},
        {"bias_samples", 2048}, {"x", 0.5},
        {"means", {-1.0, 1.0}}, {"weights", {0.5, 0.5}}, {"stddev", 0.0}, {"record_every", 10}}}};
}

json merge_config(const json& base, const json& overrides) {
  if (!overrides.is_object()) throw ConfigError("config file must contain a JSON object");
  json out = base;
  merge_into(out, overrides, "");
  return out;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config file {} is not valid JSON: {}", path.string(), e.what()));
  }
}

void set_config_value(json& config, const std::string& dotted_key, const std::string& text) {
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json patch = value;
  std::string rest = dotted_key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
    parts.push_back(rest.substr(0, pos));
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  // A string slot given text that parses as another JSON type keeps the text.
  const json* slot = &config;
  for (const auto& p : parts) {
    if (!slot->is_object() || !slot->contains(p)) break;
    slot = &slot->at(p);
  }
  if (slot->is_string() && !value.is_string()) {
    patch = text;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  }
  config = merge_config(config, patch);
}

ResampleSpec resample_spec_from(const json& config) {
  const json& d = section(config, "data");
  ResampleSpec s;
  s.scale = get<int>(d, "scale");
  s.kernel_a = get<double>(d, "kernel_a");
  s.antialias = get<bool>(d, "antialias");
  if (s.scale < 2) throw ConfigError(fmt::format("data.scale must be >= 2, got {}", s.scale));
  return s;
}

PrepareOptions prepare_options_from(const json& config) {
  PrepareOptions o;
  o.spec = resample_spec_from(config);
  o.val_period = get<int>(section(config, "data"), "val_period");
  return o;
}

GeneratorConfig generator_config_from(const json& config) {
  GeneratorConfig g = GeneratorConfig::from_json(section(section(config, "model"), "generator"));
  const int scale = resample_spec_from(config).scale;
  if (g.scale != scale) {
    throw ConfigError(fmt::format("model.generator.scale ({}) must equal data.scale ({})", g.scale, scale));
  }
  g.validate();
  return g;
}

EncoderConfig encoder_config_from(const json& config) {
  EncoderConfig e = EncoderConfig::from_json(section(section(config, "model"), "encoder"));
  const int scale = resample_spec_from(config).scale;
  if (e.scale != scale) {
    throw ConfigError(fmt::format("model.encoder.scale ({}) must equal data.scale ({})", e.scale, scale));
  }
  e.validate();
  return e;
}

FidelityPretrainConfig fidelity_config_from(const json& config) {
  const json& f = section(config, "fidelity");
  FidelityPretrainConfig c;
  c.generator = generator_config_from(config);
  c.steps = get<std::int64_t>(f, "steps");
  c.batch = get<int>(f, "batch");
  c.hr_patch = get<int>(f, "hr_patch");
  c.lr = get<double>(f, "lr");
  c.augment = get<bool>(f, "augment");
  c.log_interval = get<std::int64_t>(f, "log_interval");
  c.seed = get<std::uint64_t>(section(config, "global"), "seed");
  c.snapshot = config;
  return c;
}

AePretrainConfig ae_config_from(const json& config) {
  const json& a = section(config, "ae");
  AePretrainConfig c;
  c.steps = get<std::int64_t>(a, "steps");
  c.batch = get<int>(a, "batch");
  c.hr_patch = get<int>(a, "hr_patch");
  c.lr = get<double>(a, "lr");
  c.augment = get<bool>(a, "augment");
  c.log_interval = get<std::int64_t>(a, "log_interval");
  c.seed = get<std::uint64_t>(section(config, "global"), "seed");
  return c;
}

TrainRunConfig train_config_from(const json& config) {
  const json& t = section(config, "train");
  TrainRunConfig c;
  json loss = get<json>(t, "loss");
  loss["mode"] = get<std::string>(t, "mode");
  c.loss = LossConfig::from_json(loss);
  c.generator = generator_config_from(config);
  c.discriminator = DiscriminatorConfig::from_json(section(section(config, "model"), "discriminator"));
  c.extractor = ExtractorConfig::from_json(section(section(config, "model"), "extractor"));
  c.hr_patch = get<int>(t, "hr_patch");
  c.batch = get<int>(t, "batch");
  c.steps = get<std::int64_t>(t, "steps");
  c.lr = get<double>(t, "lr");
  c.lr_d = get<double>(t, "lr_d");
  c.augment = get<bool>(t, "augment");
  c.ae_checkpoint = get<std::string>(t, "ae_checkpoint");
  c.generator_init = get<std::string>(t, "generator_init");
  c.log_interval = get<std::int64_t>(t, "log_interval");
  c.ckpt_interval = get<std::int64_t>(t, "ckpt_interval");
  c.sample_interval = get<std::int64_t>(t, "sample_interval");
  c.verify_substeps = get<bool>(t, "verify_substeps");
  c.seed = get<std::uint64_t>(section(config, "global"), "seed");
  c.snapshot = config;
  return c;
}

seve::ToyInverseProblem toy_problem_from(const json& config) {
  const json& s = section(config, "seve");
  seve::ToyInverseProblem p;
  p.x = get<double>(s, "x");
  p.means = get<std::vector<double>>(s, "means");
  p.weights = get<std::vector<double>>(s, "weights");
  p.stddev = get<double>(s, "stddev");
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("seve posterior: {}", e.what()));
  }
  return p;
}

seve::ToyRunConfig toy_run_from(const json& config) {
  const json& s = section(config, "seve");
  seve::ToyRunConfig r;
  r.steps = get<std::int64_t>(s, "steps");
  r.batch = get<int>(s, "batch");
  r.lr = get<double>(s, "lr");
  r.hidden = get<int>(s, "hidden");
  r.bias_samples = get<int>(s, "bias_samples");
  r.init_offset = get<double>(s, "init_offset");
  r.init_std = get<double>(s, "init_std");
  r.record_every = get<std::int64_t>(s, "record_every");
  return r;
}

}  // namespace aesop
