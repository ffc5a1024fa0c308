#include <gtest/gtest.h>

#include "aesop/checkpoint.hpp"
#include "aesop/errors.hpp"
#include "aesop/hash.hpp"
#include "aesop/model_state.hpp"
#include "aesop/networks.hpp"
#include "aesop/ops.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

GeneratorConfig small_generator(int scale = 2, int blocks = 1) {
  return {.num_rrdb_blocks = blocks, .base_channels = 8, .growth_channels = 4, .scale = scale};
}

TEST(Generator, ShapeContractOnZeros) {
  for (int s : {2, 3, 4}) {
    Generator g(small_generator(s), 1);
    const ag::Var out = g.forward(ag::Var(Tensor({1, 3, 5, 6})));
    EXPECT_EQ(out.shape(), (Shape{1, 3, 5 * s, 6 * s}));
    EXPECT_TRUE(out.value().all_finite());
  }
}

TEST(Generator, SameSeedSameParameters) {
  Generator a(small_generator(), 7), b(small_generator(), 7), c(small_generator(), 8);
  EXPECT_EQ(a.state().checksum(), b.state().checksum());
  EXPECT_NE(a.state().checksum(), c.state().checksum());
}

TEST(Generator, ParameterCountGrowsWithBlocks) {
  std::size_t prev = 0;
  for (int blocks = 1; blocks <= 3; ++blocks) {
    Generator g(small_generator(2, blocks), 1);
    EXPECT_GT(g.state().parameter_count(), prev);
    prev = g.state().parameter_count();
  }
}

TEST(Generator, ZeroedTrunkReducesToSkipPath) {
  Generator g(small_generator(2, 2), 3);
  g.zero_trunk_blocks();
  const ag::Var x(testing::random_tensor({1, 3, 6, 6}, 4, 0.0, 1.0));
  const ag::Var feat = g.features(x);
  // Zeroed dense blocks are identities, so each RRDB reduces to its outer
  // residual (1 + 0.2) x and the trunk to feat + conv_body(1.2^2 feat).
  const ag::Var body_in = ag::scale(feat, 1.2 * 1.2);
  const ag::Var skip = ag::add(feat, ag::conv2d(body_in, g.state().parameter("conv_body.weight"),
                                                g.state().parameter("conv_body.bias"), 1, 1));
  const Tensor trunk = g.trunk(feat).value();
  for (std::size_t i = 0; i < trunk.size(); ++i) EXPECT_NEAR(trunk[i], skip.value()[i], 1e-12);
  const Tensor full = g.forward(x).value();
  const Tensor via_skip = g.upsample_head(skip).value();
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full[i], via_skip[i], 1e-12);
}

TEST(Encoder, ShapeContractAndLightweight) {
  for (int s : {2, 4}) {
    EncoderConfig cfg{.scale = s, .rrdb_channels = 16};
    Encoder e(cfg, 1);
    const ag::Var out = e.forward(ag::Var(testing::random_tensor({2, 3, 4 * s, 3 * s}, 2, 0.0, 1.0)));
    EXPECT_EQ(out.shape(), (Shape{2, 3, 4, 3}));
    Generator dec({.num_rrdb_blocks = 4, .base_channels = 16, .growth_channels = 8, .scale = s}, 1);
    EXPECT_LT(e.state().parameter_count(), dec.state().parameter_count());
  }
  Encoder e({.scale = 2, .rrdb_channels = 8}, 1);
  EXPECT_THROW(e.forward(ag::Var(Tensor({1, 3, 5, 4}))), DimensionError);
  EXPECT_THROW(Encoder({.scale = 4, .rrdb_channels = 24}, 1), ConfigError);
}

TEST(Encoder, DeterministicForward) {
  Encoder e({.scale = 2, .rrdb_channels = 8}, 5);
  const ag::Var x(testing::random_tensor({1, 3, 8, 8}, 6, 0.0, 1.0));
  EXPECT_EQ(e.forward(x).value(), e.forward(x).value());
}

TEST(Discriminator, FiniteLogitsStableShapeAndInputGradient) {
  auto d = build_discriminator({.base_channels = 8, .num_downsamples = 2}, 16, 3);
  const Tensor x = testing::random_tensor({2, 3, 16, 16}, 7, 0.0, 1.0);
  const ag::Var a = d->forward(ag::Var(x));
  EXPECT_EQ(a.shape(), d->output_shape(x.shape()));
  EXPECT_EQ(a.shape(), (Shape{2, 1, 4, 4}));
  EXPECT_TRUE(a.value().all_finite());
  EXPECT_EQ(d->forward(ag::Var(x)).value(), a.value());
  const auto check = testing::check_gradient([&](const ag::Var& v) { return ag::sum(d->forward(v)); }, x, 10, 8);
  EXPECT_LT(check.max_rel_error, 1e-5);
  EXPECT_GT(check.max_abs_grad, 0.0);
  EXPECT_THROW(d->forward(ag::Var(Tensor({1, 3, 6, 6}))), DimensionError);
}

TEST(Extractor, FrozenAtBuildAndFixedSeed) {
  ConvFeatureExtractor a, b;
  EXPECT_TRUE(a.state().frozen());
  EXPECT_EQ(a.state().checksum(), b.state().checksum());
  EXPECT_EQ(a.features(ag::Var(Tensor({1, 3, 8, 8}, 0.5))).size(), a.config().feature_layers.size());
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  testing::ScratchDir dir("ckpt_rt");
  Generator g(small_generator(), 9);
  g.state().set_frozen(true);
  g.state().set_training_step(42);
  save_checkpoint(g.state(), dir.path() / "a.ckpt");
  Generator h(small_generator(), 10);
  load_checkpoint(h.state(), dir.path() / "a.ckpt");
  EXPECT_EQ(h.state().checksum(), g.state().checksum());
  EXPECT_TRUE(h.state().frozen());
  EXPECT_EQ(h.state().training_step(), 42);
  save_checkpoint(h.state(), dir.path() / "b.ckpt");
  EXPECT_EQ(file_checksum(dir.path() / "a.ckpt"), file_checksum(dir.path() / "b.ckpt"));
}

TEST(Checkpoint, WrongScaleIsFingerprintError) {
  testing::ScratchDir dir("ckpt_fp");
  Generator g(small_generator(2), 1);
  save_checkpoint(g.state(), dir.path() / "g.ckpt");
  Generator other(small_generator(4), 1);
  EXPECT_THROW(load_checkpoint(other.state(), dir.path() / "g.ckpt"), FingerprintError);
  EXPECT_THROW(build_generator(small_generator(4), GeneratorInit::kPretrainedCheckpoint, 0, dir.path() / "g.ckpt"),
               FingerprintError);
  EXPECT_EQ(load_generator(dir.path() / "g.ckpt")->state().checksum(), g.state().checksum());
}

}  // namespace
}  // namespace aesop
