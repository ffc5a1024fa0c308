#include <fstream>

#include <gtest/gtest.h>

#include "aesop/dataset.hpp"
#include "aesop/errors.hpp"
#include "aesop/image_io.hpp"
#include "aesop/metrics.hpp"
#include "aesop/synthetic.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

class DatasetTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::ScratchDir("dataset");
    write_synthetic_corpus(dir_->path() / "src", {.count = 3, .height = 48, .width = 64, .seed = 1});
    // An odd-sized image exercises the center crop.
    write_png(dir_->path() / "src" / "odd.png", synthetic_image(50, 43, 2));
  }
  static void TearDownTestSuite() { delete dir_; }

  static PairedDataset prepare(const std::string& name, int scale, PrepareReport* report = nullptr) {
    PrepareOptions opt;
    opt.spec.scale = scale;
    opt.val_period = 2;
    return prepare_dataset(dir_->path() / "src", dir_->path() / name, opt, report);
  }

  static testing::ScratchDir* dir_;
};

testing::ScratchDir* DatasetTest::dir_ = nullptr;

TEST_F(DatasetTest, WritesLrAtQuarterSizeAndCropsOddImages) {
  PrepareReport report;
  const PairedDataset ds = prepare("x4", 4, &report);
  EXPECT_EQ(ds.size(), 4u);
  EXPECT_EQ(report.written, 4u);
  ASSERT_EQ(report.cropped.size(), 1u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(ds.lr(i).height() * 4, ds.hr(i).height());
    EXPECT_EQ(ds.lr(i).width() * 4, ds.hr(i).width());
    EXPECT_EQ(ds.hr(i).height() % 4, 0);
  }
  EXPECT_EQ(ds.subset(Split::kValidation).size(), 2u);
  EXPECT_EQ(ds.subset(Split::kTrain).size(), 2u);
}

TEST_F(DatasetTest, StoredLrIsQuantizedDownsampleOfHr) {
  const PairedDataset ds = prepare("x2", 2);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto down = quantize8(bicubic_downsample(ds.hr(i), ds.resample_spec()));
    EXPECT_EQ(down.tensor(), ds.lr(i).tensor());
    EXPECT_EQ(lr_psnr(ds.hr(i), ds.lr(i), ds.resample_spec()), kInfinitePsnr);
  }
}

TEST_F(DatasetTest, RerunRewritesNothingAndAuditPasses) {
  prepare("rerun", 2);
  PrepareReport report;
  const PairedDataset ds = prepare("rerun", 2, &report);
  EXPECT_EQ(report.written, 0u);
  EXPECT_EQ(report.verified, 4u);
  EXPECT_TRUE(audit_dataset(ds).ok());
}

TEST_F(DatasetTest, TamperedLrFailsAuditNamingTheFile) {
  const PairedDataset ds = prepare("tamper", 2);
  const auto path = ds.root() / ds.entries()[1].lr_path;
  auto img = read_png(path);
  img.at(0, 0, 0) = img.at(0, 0, 0) > 0.5 ? 0.0 : 1.0;
  write_png(path, img);
  const AuditReport audit = audit_dataset(PairedDataset::open(ds.root()));
  ASSERT_EQ(audit.failures.size(), 1u);
  EXPECT_NE(audit.failures[0].find(ds.entries()[1].id), std::string::npos);
  EXPECT_THROW(prepare("tamper", 2), AuditError);
}

TEST_F(DatasetTest, PatchesAreAlignedAndDeterministic) {
  const PairedDataset ds = prepare("x2", 2);
  PatchSampler a(ds, 16, 4, true, 5), b(ds, 16, 4, true, 5);
  for (int step = 0; step < 5; ++step) {
    const PatchBatch pa = a.next(), pb = b.next();
    EXPECT_EQ(pa.hr.tensor(), pb.hr.tensor());
    EXPECT_EQ(pa.lr.tensor(), pb.lr.tensor());
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(pa.hr_top[k] % 2, 0);
      EXPECT_EQ(pa.hr_left[k] % 2, 0);
      const auto src_lr = crop(ds.lr(pa.image_index[k]), pa.hr_top[k] / 2, pa.hr_left[k] / 2, 8, 8);
      EXPECT_EQ(apply_dihedral(src_lr, pa.transform[k]).tensor(), pa.lr.item(k).tensor());
    }
  }
}

TEST_F(DatasetTest, SamplerStateRoundTrips) {
  const PairedDataset ds = prepare("x2", 2);
  PatchSampler a(ds, 16, 2, true, 6);
  a.next();
  const std::string state = a.rng_state();
  const PatchBatch expected = a.next();
  PatchSampler b(ds, 16, 2, true, 99);
  b.set_rng_state(state);
  EXPECT_EQ(b.next().hr.tensor(), expected.hr.tensor());
}

TEST_F(DatasetTest, PatchMeanTracksDatasetMean) {
  const PairedDataset ds = prepare("x2", 2);
  double total = 0, count = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.hr(i).tensor().values()) total += v;
    count += static_cast<double>(ds.hr(i).tensor().size());
  }
  PatchSampler sampler(ds, 16, 10, true, 7);
  double sum = 0;
  for (int i = 0; i < 100; ++i) sum += mean_value(sampler.next().hr);
  EXPECT_NEAR(sum / 100, total / count, 0.05);
}

TEST_F(DatasetTest, OversizedPatchIsAnError) {
  const PairedDataset ds = prepare("x2", 2);
  EXPECT_ANY_THROW(PatchSampler(ds, 128, 2, false, 1));
}

TEST(Dihedral, GroupClosure) {
  const auto img = testing::random_image(3, 6, 6, 3);
  EXPECT_EQ(apply_dihedral(apply_dihedral(img, 4), 4).tensor(), img.tensor());
  EXPECT_EQ(apply_dihedral(img, 0).tensor(), img.tensor());
  std::vector<Tensor> seen;
  for (int k = 0; k < 8; ++k) {
    const Tensor t = apply_dihedral(img, k).tensor();
    for (const auto& s : seen) EXPECT_NE(s, t) << k;
    seen.push_back(t);
    auto four = apply_dihedral(img, k);
    if (k < 4) {
      for (int r = 0; r < 3; ++r) four = apply_dihedral(four, k);
      // k applied four times is k*4 quarter turns, a full rotation.
      EXPECT_EQ(four.tensor(), img.tensor()) << k;
    }
  }
}

}  // namespace
}  // namespace aesop
