#include <fstream>

#include <gtest/gtest.h>

#include "aesop/config.hpp"
#include "aesop/errors.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

using nlohmann::json;

TEST(Config, EveryPresetHasTheSameKeys) {
  const json tiny = preset_config("tiny").flatten();
  for (const auto& name : preset_names()) {
    const json p = preset_config(name);
    const json flat = p.flatten();
    EXPECT_EQ(flat.size(), tiny.size()) << name;
    for (const auto& [key, value] : tiny.items()) EXPECT_TRUE(flat.contains(key)) << name << key;
    EXPECT_NO_THROW(train_config_from(p)) << name;
    EXPECT_NO_THROW(ae_config_from(p)) << name;
    EXPECT_NO_THROW(fidelity_config_from(p)) << name;
  }
  EXPECT_THROW(preset_config("huge"), ConfigError);
}

TEST(Config, DeskDefaultsMatchDocumentedValues) {
  const json desk = preset_config("desk");
  const GeneratorConfig g = generator_config_from(desk);
  EXPECT_EQ(g.num_rrdb_blocks, 4);
  EXPECT_EQ(g.base_channels, 32);
  EXPECT_EQ(g.growth_channels, 16);
  EXPECT_EQ(encoder_config_from(desk).rrdb_channels, 32);
  const TrainRunConfig t = train_config_from(desk);
  EXPECT_EQ(t.steps, 2000);
  EXPECT_EQ(t.lr, 1e-4);
  EXPECT_EQ(t.loss.lambda_pix, 0.01);
  EXPECT_EQ(t.loss.lambda_adv, 0.005);
  EXPECT_EQ(t.loss.p, 1);
  const GeneratorConfig full = generator_config_from(preset_config("full"));
  EXPECT_EQ(full.num_rrdb_blocks, 23);
  EXPECT_EQ(train_config_from(preset_config("full")).hr_patch, 128);
}

TEST(Config, UnknownKeyNamedInError) {
  try {
    merge_config(preset_config("desk"), json{{"train", {{"stepz", 5}}}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.stepz"), std::string::npos);
  }
}

TEST(Config, TypeMismatchRejectedButIntegersWidenToReals) {
  const json desk = preset_config("desk");
  EXPECT_THROW(merge_config(desk, json{{"train", {{"steps", "many"}}}}), ConfigError);
  EXPECT_EQ(merge_config(desk, json{{"train", {{"lr", 1}}}})["train"]["lr"], 1);
}

TEST(Config, DottedOverrides) {
  json c = preset_config("tiny");
  set_config_value(c, "train.steps", "17");
  set_config_value(c, "train.mode", "baseline");
  EXPECT_EQ(train_config_from(c).steps, 17);
  EXPECT_EQ(train_config_from(c).loss.mode, ObjectiveMode::kBaseline);
  EXPECT_THROW(set_config_value(c, "train.nope", "1"), ConfigError);
  set_config_value(c, "train.mode", "other");
  EXPECT_THROW(train_config_from(c), ConfigError);
}

TEST(Config, FileLoadAndScaleConsistency) {
  testing::ScratchDir dir("config");
  std::ofstream(dir.path() / "bad.json") << "{ not json";
  EXPECT_THROW(load_config_file(dir.path() / "bad.json"), ConfigError);
  json c = preset_config("desk");
  c["data"]["scale"] = 2;
  EXPECT_THROW(generator_config_from(c), ConfigError);
}

}  // namespace
}  // namespace aesop
