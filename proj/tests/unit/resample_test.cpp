#include <gtest/gtest.h>

#include "aesop/errors.hpp"
#include "aesop/resample.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

std::vector<double> plane_of(const ImageTensor& img, int c) {
  std::vector<double> out;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.push_back(img.at(c, y, x));
  return out;
}

TEST(CubicKernel, MatchesReference) {
  for (double x = -2.5; x <= 2.5; x += 0.125) EXPECT_NEAR(cubic_kernel(x, -0.5), testing::keys_kernel(x, -0.5), 1e-15);
  EXPECT_EQ(cubic_kernel(0.0, -0.5), 1.0);
  EXPECT_EQ(cubic_kernel(1.0, -0.5), 0.0);
}

TEST(BicubicDown, ConstantStaysConstant) {
  for (int s : {2, 3, 4}) {
    const auto img = ImageTensor::rgb(6 * s, 4 * s, 0.37);
    const auto out = bicubic_downsample(img, {.scale = s});
    EXPECT_EQ(out.height(), 6);
    for (double v : out.tensor().values()) EXPECT_NEAR(v, 0.37, 1e-14);
  }
}

TEST(BicubicDown, CheckerboardBecomesUniformHalf) {
  auto img = ImageTensor::luma(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(0, y, x) = (x + y) % 2;
  const auto out = bicubic_downsample(img, {.scale = 2});
  for (double v : out.tensor().values()) EXPECT_NEAR(v, 0.5, 1e-14);
}

TEST(BicubicDown, MatchesDirectConvolutionOracle) {
  const auto img = testing::random_image(1, 24, 20, 11);
  for (int s : {2, 4}) {
    const auto out = bicubic_downsample(img, {.scale = s});
    const auto ref = testing::direct_bicubic_down(plane_of(img, 0), 24, 20, s, -0.5);
    ASSERT_EQ(out.tensor().size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out.tensor()[i], ref[i], 1e-12);
  }
}

TEST(BicubicDown, RejectsNonDivisible) {
  EXPECT_THROW(bicubic_downsample(ImageTensor::rgb(10, 8), {.scale = 4}), DimensionError);
}

TEST(BicubicUp, ConstantAndSinglePixel) {
  const auto one = ImageTensor::luma(1, 1, 0.42);
  const auto up = bicubic_upsample(one, {.scale = 2});
  ASSERT_EQ(up.height(), 2);
  for (double v : up.tensor().values()) EXPECT_NEAR(v, 0.42, 1e-15);
}

TEST(BicubicUp, DeltaMatchesKernelFootprintOracle) {
  auto delta = ImageTensor::luma(9, 9);
  delta.at(0, 4, 4) = 1.0;
  const auto up = bicubic_upsample(delta, {.scale = 4});
  const auto ref = testing::direct_bicubic_up(plane_of(delta, 0), 9, 9, 4, -0.5);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(up.tensor()[i], ref[i], 1e-13);
}

TEST(BicubicUp, BatchedMatchesPerImage) {
  const auto a = testing::random_image(3, 5, 6, 1);
  const auto b = testing::random_image(3, 5, 6, 2);
  const auto batched = bicubic_upsample(stack({a, b}), {.scale = 3});
  EXPECT_EQ(batched.item(1).tensor(), bicubic_upsample(b, {.scale = 3}).tensor());
}

TEST(ResampleTaps, WeightsSumToOne) {
  for (auto dir : {ResampleDirection::kDown, ResampleDirection::kUp}) {
    for (const auto& t : resample_taps(16, dir == ResampleDirection::kDown ? 4 : 64, dir, {.scale = 4})) {
      double sum = 0;
      for (double w : t.weight) sum += w;
      EXPECT_NEAR(sum, 1.0, 1e-14);
    }
  }
}

}  // namespace
}  // namespace aesop
