#include <gtest/gtest.h>

#include "aesop/errors.hpp"
#include "aesop/metrics.hpp"
#include "aesop/resample.hpp"
#include "aesop/synthetic.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

TEST(Psnr, IdenticalIsSentinelAndOffsetIsTwentyDb) {
  const auto a = testing::random_image(3, 16, 16, 1);
  EXPECT_EQ(psnr(a, a), kInfinitePsnr);
  // 0.6 - 0.5 rounds to the same double as 0.1.
  auto b = ImageTensor::rgb(16, 16, 0.5);
  auto c = ImageTensor::rgb(16, 16, 0.6);
  EXPECT_EQ(psnr(b, c, {.on_y = false, .quantize = false}), 20.0);
}

TEST(Psnr, SymmetricAndBorderAware) {
  const auto a = testing::random_image(3, 16, 16, 2);
  const auto b = testing::random_image(3, 16, 16, 3);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  auto c = a;
  c.at(0, 0, 0) = 1.0 - c.at(0, 0, 0);
  EXPECT_EQ(psnr(a, c, {.border = 1}), kInfinitePsnr);
  EXPECT_LT(psnr(a, c, {.border = 0}), kInfinitePsnr);
}

TEST(Psnr, QuantizedMatchesFileRoundTrip) {
  const auto a = testing::random_image(3, 12, 12, 4);
  const auto b = testing::random_image(3, 12, 12, 5);
  EXPECT_EQ(psnr(a, b), psnr(quantize8(a), quantize8(b), {.quantize = false}));
  EXPECT_EQ(ssim(a, b), ssim(quantize8(a), quantize8(b), {.quantize = false}));
}

TEST(Ssim, IdenticalIsOneAndInverseIsLower) {
  const auto a = synthetic_image(32, 32, 3);
  EXPECT_EQ(ssim(a, a), 1.0);
  auto inv = a;
  for (double& v : inv.mutable_tensor().values()) v = 1.0 - v;
  EXPECT_LT(ssim(a, inv), 1.0);
  EXPECT_EQ(ssim(a, inv), ssim(inv, a));
  EXPECT_THROW(ssim(ImageTensor::rgb(8, 8), ImageTensor::rgb(8, 8)), DimensionError);
}

TEST(Ssim, MatchesWindowedOracle) {
  const auto a = testing::random_image(1, 20, 18, 6);
  const auto b = testing::random_image(1, 20, 18, 7);
  std::vector<double> pa(a.tensor().values().begin(), a.tensor().values().end());
  std::vector<double> pb(b.tensor().values().begin(), b.tensor().values().end());
  EXPECT_NEAR(ssim(a, b, {.on_y = false, .quantize = false}), testing::windowed_ssim(pa, pb, 20, 18), 1e-12);
}

TEST(AePsnr, IdentityEstimatorEqualsPsnr) {
  IdentityBiasEstimator identity(4);
  const auto hr = testing::random_image(3, 32, 32, 8);
  const auto sr = testing::random_image(3, 32, 32, 9);
  EXPECT_EQ(ae_psnr(sr, hr, identity), psnr(sr, hr, {.on_y = true, .border = 4}));
  EXPECT_EQ(ae_psnr(hr, hr, identity), kInfinitePsnr);
}

TEST(LrPsnr, OwnLrIsSentinelAndBicubicRoundTripIsHigh) {
  const ResampleSpec spec{.scale = 4};
  const auto hr = quantize8(synthetic_image(64, 64, 10));
  const auto lr = quantize8(bicubic_downsample(hr, spec));
  EXPECT_EQ(lr_psnr(hr, lr, spec), kInfinitePsnr);
  EXPECT_GT(lr_psnr(bicubic_upsample(lr, spec), lr, spec), 40.0);
}

}  // namespace
}  // namespace aesop
