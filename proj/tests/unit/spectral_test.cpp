#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "aesop/spectral.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

ImageTensor horizontal_sinusoid(int h, int w, int cycles) {
  auto img = ImageTensor::luma(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(0, y, x) = 0.5 + 0.4 * std::cos(2.0 * std::numbers::pi * cycles * x / w);
  return img;
}

TEST(Spectral, NormalizedFrequencyRange) {
  EXPECT_EQ(normalized_frequency(0, 8), 0.0);
  EXPECT_EQ(normalized_frequency(4, 8), -0.5);
  EXPECT_EQ(normalized_frequency(7, 8), -0.125);
  EXPECT_TRUE(in_passband(0.5, 0.5, 0.5));
  EXPECT_FALSE(in_passband(0.2, 0.2, 0.25));
}

TEST(Spectral, ConstantImageIsDcOnly) {
  const auto mag = spectral_magnitude(ImageTensor::luma(16, 16, 0.6));
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const double v = mag[static_cast<std::size_t>(y) * 16 + x];
      if (y == 8 && x == 8) {
        EXPECT_NEAR(v, std::log1p(0.6 * 256), 1e-12);
      } else {
        EXPECT_NEAR(v, 0.0, 1e-12);
      }
    }
}

TEST(Spectral, SinusoidHasTwoSymmetricPeaks) {
  const auto power = spectral_power(horizontal_sinusoid(16, 32, 4));
  double total = 0;
  for (double v : power.values()) total += v;
  const double dc = power[8 * 32 + 16];
  const double left = power[8 * 32 + 12];
  const double right = power[8 * 32 + 20];
  EXPECT_NEAR(left, right, 1e-9 * total);
  EXPECT_NEAR(dc + left + right, total, 1e-9 * total);
  EXPECT_GT(left, 0.0);
}

TEST(Spectral, ParsevalSum) {
  const auto img = testing::random_image(1, 12, 10, 5);
  double energy = 0;
  for (double v : img.tensor().values()) energy += v * v;
  double total = 0;
  const Tensor power = spectral_power(img);
  for (double v : power.values()) total += v;
  EXPECT_NEAR(total, 120.0 * energy, 1e-9 * total);
}

TEST(Lowpass, NyquistCutoffIsIdentity) {
  const auto img = testing::random_image(3, 16, 12, 2);
  const auto out = lowpass_filter(img, 0.5);
  for (std::size_t i = 0; i < img.tensor().size(); ++i) EXPECT_NEAR(out.tensor()[i], img.tensor()[i], 1e-12);
}

TEST(Lowpass, ConstantUnchanged) {
  const auto out = lowpass_filter(ImageTensor::rgb(8, 8, 0.25), 0.05);
  for (double v : out.tensor().values()) EXPECT_NEAR(v, 0.25, 1e-14);
}

TEST(Lowpass, SinusoidAboveCutoffRemoved) {
  const auto out = lowpass_filter(horizontal_sinusoid(16, 32, 8), 0.125);
  for (double v : out.tensor().values()) EXPECT_NEAR(v, 0.5, 1e-12);
  EXPECT_LT(high_frequency_energy(out, 0.125), 1e-20);
}

TEST(Lowpass, RejectsCutoffOutsideRange) {
  const auto img = ImageTensor::luma(4, 4);
  EXPECT_ANY_THROW(lowpass_filter(img, 0.0));
  EXPECT_ANY_THROW(lowpass_filter(img, 0.6));
}

}  // namespace
}  // namespace aesop
