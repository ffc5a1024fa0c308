#include <gtest/gtest.h>

#include "aesop/autoencoder.hpp"
#include "aesop/errors.hpp"
#include "aesop/metrics.hpp"
#include "aesop/ops.hpp"
#include "aesop/synthetic.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

const EncoderConfig kEnc{.scale = 2, .rrdb_channels = 8};
const GeneratorConfig kDec{.num_rrdb_blocks = 1, .base_channels = 8, .growth_channels = 4, .scale = 2};

TEST(AutoEncoder, ShapeContractAtScaleFour) {
  AutoEncoder ae({.scale = 4, .rrdb_channels = 16}, {.num_rrdb_blocks = 1, .base_channels = 8, .growth_channels = 4,
                                                      .scale = 4},
                 1);
  const auto [bottleneck, rec] = ae.forward(testing::random_image(3, 64, 64, 2));
  EXPECT_EQ(bottleneck.tensor().shape(), (Shape{3, 16, 16}));
  EXPECT_EQ(rec.tensor().shape(), (Shape{3, 64, 64}));
  EXPECT_TRUE(rec.tensor().all_finite());
}

TEST(AutoEncoder, MismatchedScalesRejected) {
  EXPECT_THROW(AutoEncoder(kEnc, {.num_rrdb_blocks = 1, .base_channels = 8, .growth_channels = 4, .scale = 4}, 1),
               ConfigError);
}

TEST(AutoEncoder, FreezeIsIdempotentAndSurvivesCheckpoint) {
  testing::ScratchDir dir("ae_ckpt");
  AutoEncoder ae(kEnc, kDec, 3);
  ae.set_pretrain_complete(true);
  ae.freeze();
  const std::uint64_t sum = ae.checksum();
  ae.freeze();
  EXPECT_TRUE(ae.frozen());
  EXPECT_EQ(ae.checksum(), sum);
  ae.save(dir.path() / "ae.ckpt");
  auto back = AutoEncoder::from_checkpoint(dir.path() / "ae.ckpt");
  EXPECT_TRUE(back->frozen());
  EXPECT_TRUE(back->pretrain_complete());
  EXPECT_EQ(back->checksum(), sum);
}

TEST(AutoEncoder, PretrainingReducesReconstructionAndFreezes) {
  testing::ScratchDir dir("ae_pretrain");
  write_synthetic_corpus(dir.path() / "src", {.count = 6, .height = 32, .width = 32, .seed = 4});
  PrepareOptions opt;
  opt.spec.scale = 2;
  opt.val_period = 3;
  const PairedDataset ds = prepare_dataset(dir.path() / "src", dir.path() / "data", opt);
  AutoEncoder ae(kEnc, kDec, 5);
  AePretrainConfig cfg{.steps = 150, .batch = 4, .hr_patch = 16, .lr = 1e-3, .seed = 1};
  cfg.log_csv = dir.path() / "ae_loss.csv";
  cfg.log_interval = 10;
  const AePretrainReport report = pretrain_ae(ae, ds.subset(Split::kTrain), ds.subset(Split::kValidation), cfg);
  EXPECT_TRUE(ae.frozen());
  EXPECT_TRUE(ae.pretrain_complete());
  EXPECT_EQ(ae.pretrain_step(), 150);
  EXPECT_LT(report.final.rec_hr, report.initial.rec_hr);
  EXPECT_LT(report.final.rec_lr, report.initial.rec_lr);
  EXPECT_TRUE(std::filesystem::exists(cfg.log_csv));
}

TEST(AutoEncoder, GradientFlowsThroughFrozenModel) {
  AutoEncoder ae(kEnc, kDec, 6);
  ae.freeze();
  ag::Var x(testing::random_tensor({1, 3, 8, 8}, 7, 0.0, 1.0), true);
  ag::backward(ag::sum(ae.reconstruct(x)));
  double norm = 0;
  const Tensor grad = x.grad();
  for (double g : grad.values()) norm += g * g;
  EXPECT_GT(norm, 0.0);
  for (const auto& [name, p] : ae.decoder().state().parameters()) EXPECT_FALSE(p.has_grad()) << name;
}

}  // namespace
}  // namespace aesop
