#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "aesop/autoencoder.hpp"
#include "aesop/checkpoint.hpp"
#include "aesop/csv.hpp"
#include "aesop/errors.hpp"
#include "aesop/synthetic.hpp"
#include "aesop/trainer.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::ScratchDir("trainer");
    write_synthetic_corpus(dir_->path() / "src", {.count = 6, .height = 32, .width = 32, .seed = 2});
    PrepareOptions opt;
    opt.spec.scale = 2;
    opt.val_period = 3;
    prepare_dataset(dir_->path() / "src", dir_->path() / "data", opt);
    AutoEncoder ae({.scale = 2, .rrdb_channels = 8}, generator(), 1);
    ae.set_pretrain_complete(true);
    ae.freeze();
    ae.save(dir_->path() / "ae.ckpt");
  }
  static void TearDownTestSuite() { delete dir_; }

  static GeneratorConfig generator() {
    return {.num_rrdb_blocks = 1, .base_channels = 8, .growth_channels = 4, .scale = 2};
  }

  static TrainRunConfig config(const std::string& run, ObjectiveMode mode, std::int64_t steps) {
    TrainRunConfig cfg;
    cfg.loss.mode = mode;
    cfg.generator = generator();
    cfg.discriminator = {.base_channels = 8, .num_downsamples = 2};
    cfg.hr_patch = 16;
    cfg.batch = 2;
    cfg.steps = steps;
    cfg.seed = 3;
    cfg.ae_checkpoint = dir_->path() / "ae.ckpt";
    cfg.log_interval = 5;
    cfg.ckpt_interval = 10;
    cfg.sample_interval = 10;
    cfg.run_dir = dir_->path() / run;
    return cfg;
  }

  static PairedDataset train_set() { return PairedDataset::open(dir_->path() / "data").subset(Split::kTrain); }

  static testing::ScratchDir* dir_;
};

testing::ScratchDir* TrainerTest::dir_ = nullptr;

TEST_F(TrainerTest, SmokeRunWritesRunDirectoryAndFiniteLosses) {
  const TrainRunConfig cfg = config("smoke", ObjectiveMode::kAesop, 20);
  const TrainResult r = train_sr(cfg, train_set());
  EXPECT_EQ(r.steps, 20);
  ASSERT_EQ(r.history.size(), 20u);
  for (const auto& b : r.history) {
    EXPECT_TRUE(std::isfinite(b.total));
    EXPECT_EQ(b.pix, 0.0);
  }
  for (const char* f : {"config.json", "VERSION", "run.json", "loss.csv", "final.ckpt"})
    EXPECT_TRUE(fs::exists(cfg.run_dir / f)) << f;
  EXPECT_TRUE(fs::exists(checkpoint_path(cfg.run_dir, 10)));
  EXPECT_FALSE(fs::is_empty(cfg.run_dir / "samples"));
  EXPECT_EQ(read_csv(cfg.run_dir / "loss.csv").rows.size(), 20u);
  auto g = load_generator(r.final_checkpoint);
  EXPECT_EQ(g->state().training_step(), 20);
  const auto ae = AutoEncoder::from_checkpoint(cfg.ae_checkpoint);
  EXPECT_EQ(ae->checksum(), r.ae_checksum);
}

TEST_F(TrainerTest, ResumeReproducesUninterruptedRun) {
  const TrainRunConfig full = config("full", ObjectiveMode::kBaseline, 30);
  train_sr(full, train_set());
  const TrainRunConfig part = config("part", ObjectiveMode::kBaseline, 30);
  fs::create_directories(part.run_dir);
  fs::copy(full.run_dir, part.run_dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  train_sr(part, train_set(), checkpoint_path(part.run_dir, 10));
  const CsvTable a = read_csv(full.run_dir / "loss.csv");
  const CsvTable b = read_csv(part.run_dir / "loss.csv");
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t j = 0; j < a.rows[i].size(); ++j)
      EXPECT_NEAR(std::stod(a.rows[i][j]), std::stod(b.rows[i][j]), 1e-6) << "row " << i << " col " << j;
}

TEST_F(TrainerTest, RepeatedSeededRunIsBitIdentical) {
  train_sr(config("rep_a", ObjectiveMode::kAesop, 10), train_set());
  train_sr(config("rep_b", ObjectiveMode::kAesop, 10), train_set());
  EXPECT_EQ(slurp(dir_->path() / "rep_a" / "loss.csv"), slurp(dir_->path() / "rep_b" / "loss.csv"));
}

TEST_F(TrainerTest, AesopModeRequiresFrozenAutoencoder) {
  TrainRunConfig cfg = config("no_ae", ObjectiveMode::kAesop, 5);
  cfg.ae_checkpoint.clear();
  EXPECT_THROW(train_sr(cfg, train_set()), ConfigError);

  AutoEncoder open_ae({.scale = 2, .rrdb_channels = 8}, generator(), 1);
  open_ae.save(dir_->path() / "open_ae.ckpt");
  cfg.ae_checkpoint = dir_->path() / "open_ae.ckpt";
  EXPECT_THROW(train_sr(cfg, train_set()), FreezeViolation);
}

TEST_F(TrainerTest, ScaleMismatchRejected) {
  TrainRunConfig cfg = config("bad_scale", ObjectiveMode::kBaseline, 5);
  cfg.generator.scale = 4;
  EXPECT_THROW(train_sr(cfg, train_set()), ConfigError);
}

TEST_F(TrainerTest, FidelityPretrainingLowersLossAndRepeats) {
  FidelityPretrainConfig cfg;
  cfg.generator = generator();
  cfg.steps = 60;
  cfg.batch = 4;
  cfg.hr_patch = 16;
  cfg.lr = 1e-3;
  cfg.log_interval = 10;
  const PairedDataset all = PairedDataset::open(dir_->path() / "data");
  cfg.run_dir = dir_->path() / "fid_a";
  const FidelityPretrainResult a = pretrain_fidelity_generator(cfg, all.subset(Split::kTrain), all);
  cfg.run_dir = dir_->path() / "fid_b";
  const FidelityPretrainResult b = pretrain_fidelity_generator(cfg, all.subset(Split::kTrain), all);
  EXPECT_LT(a.final_l1, 0.5 * a.initial_l1);
  EXPECT_EQ(a.final_l1, b.final_l1);
  EXPECT_EQ(slurp(dir_->path() / "fid_a" / "loss.csv"), slurp(dir_->path() / "fid_b" / "loss.csv"));
  EXPECT_TRUE(fs::exists(a.checkpoint));
}

TEST_F(TrainerTest, EvaluationCoversEveryImage) {
  const PairedDataset all = PairedDataset::open(dir_->path() / "data");
  Generator g(generator(), 4);
  IdentityBiasEstimator identity(2);
  const SrEvaluation e = evaluate_generator(g, all, &identity);
  EXPECT_EQ(e.images, all.size());
  EXPECT_TRUE(std::isfinite(e.psnr));
  EXPECT_LT(e.ssim, 1.0);
}

}  // namespace
}  // namespace aesop
