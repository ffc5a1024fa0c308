#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "aesop/ops.hpp"
#include "oracles.hpp"

namespace aesop {
namespace {

using testing::check_gradient;
using testing::random_tensor;

constexpr double kTol = 1e-5;

// Fixed weights make each check a function of the input alone.
const Tensor& fixed(const Shape& shape, std::uint64_t seed) {
  static std::map<std::pair<Shape, std::uint64_t>, Tensor> cache;
  auto& t = cache[{shape, seed}];
  if (t.empty()) t = random_tensor(shape, seed, -0.5, 0.5);
  return t;
}

TEST(Autograd, ElementwiseOps) {
  const Tensor x = random_tensor({2, 3, 4, 4}, 1);
  const ag::Var b(fixed({2, 3, 4, 4}, 2));
  EXPECT_LT(check_gradient([&](const ag::Var& v) { return ag::sum(ag::mul(v, b)); }, x, 20, 1).max_rel_error, kTol);
  EXPECT_LT(check_gradient([&](const ag::Var& v) { return ag::mean(ag::square(ag::sub(v, b))); }, x, 20, 2).max_rel_error,
            kTol);
  EXPECT_LT(check_gradient([](const ag::Var& v) { return ag::sum(ag::softplus(ag::scale(v, 3.0))); }, x, 20, 3)
                .max_rel_error,
            kTol);
  EXPECT_LT(check_gradient([](const ag::Var& v) { return ag::sum(ag::leaky_relu(v, 0.2)); }, x, 20, 4).max_rel_error,
            kTol);
}

TEST(Autograd, PowOnPositiveValues) {
  const Tensor x = random_tensor({1, 1, 5, 5}, 3, 0.2, 2.0);
  EXPECT_LT(check_gradient([](const ag::Var& v) { return ag::sum(ag::pow(v, 0.2)); }, x, 20, 5).max_rel_error, kTol);
}

TEST(Autograd, Conv2dInputWeightAndBias) {
  const Tensor x = random_tensor({2, 3, 6, 6}, 4);
  const Tensor w = random_tensor({4, 3, 3, 3}, 5);
  const Tensor b = random_tensor({4}, 6);
  for (int stride : {1, 2}) {
    const auto via_x = [&](const ag::Var& v) {
      return ag::sum(ag::square(ag::conv2d(v, ag::Var(w), ag::Var(b), stride, 1)));
    };
    const auto via_w = [&](const ag::Var& v) {
      return ag::sum(ag::square(ag::conv2d(ag::Var(x), v, ag::Var(b), stride, 1)));
    };
    const auto via_b = [&](const ag::Var& v) {
      return ag::sum(ag::square(ag::conv2d(ag::Var(x), ag::Var(w), v, stride, 1)));
    };
    EXPECT_LT(check_gradient(via_x, x, 30, 7).max_rel_error, kTol) << "stride " << stride;
    EXPECT_LT(check_gradient(via_w, w, 30, 8).max_rel_error, kTol) << "stride " << stride;
    EXPECT_LT(check_gradient(via_b, b, 4, 9).max_rel_error, kTol) << "stride " << stride;
  }
}

TEST(Autograd, Conv2dMatchesDirectLoop) {
  const Tensor x = random_tensor({1, 2, 5, 5}, 10);
  const Tensor w = random_tensor({3, 2, 3, 3}, 11);
  const Tensor out = ag::conv2d(ag::Var(x), ag::Var(w), ag::Var(), 1, 1).value();
  for (int o = 0; o < 3; ++o)
    for (int y = 0; y < 5; ++y)
      for (int xx = 0; xx < 5; ++xx) {
        double acc = 0;
        for (int c = 0; c < 2; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = y + ky - 1, ix = xx + kx - 1;
              if (iy < 0 || iy >= 5 || ix < 0 || ix >= 5) continue;
              acc += w.at(o, c, ky, kx) * x.at(0, c, iy, ix);
            }
        EXPECT_NEAR(out.at(0, o, y, xx), acc, 1e-13);
      }
}

TEST(Autograd, ShapeOps) {
  const Tensor x = random_tensor({1, 4, 4, 4}, 12);
  const ag::Var k(fixed({1, 16, 2, 2}, 13));
  EXPECT_LT(check_gradient([&](const ag::Var& v) { return ag::sum(ag::mul(ag::pixel_unshuffle(v, 2), k)); }, x, 20,
                           10)
                .max_rel_error,
            kTol);
  const ag::Var k2(fixed({1, 8, 8, 8}, 14));
  EXPECT_LT(check_gradient(
                [&](const ag::Var& v) { return ag::sum(ag::mul(ag::concat_channels({v, ag::upsample_nearest(v, 1)}), k2)); },
                random_tensor({1, 4, 8, 8}, 15), 20, 11)
                .max_rel_error,
            kTol);
  const ag::Var k3(fixed({1, 4, 8, 8}, 16));
  EXPECT_LT(check_gradient([&](const ag::Var& v) { return ag::sum(ag::mul(ag::upsample_nearest(v, 2), k3)); }, x, 20,
                           12)
                .max_rel_error,
            kTol);
}

TEST(Autograd, VarianceOps) {
  const Tensor x = random_tensor({2, 1, 8, 8}, 17);
  EXPECT_LT(check_gradient([](const ag::Var& v) { return ag::sum(ag::square(ag::local_variance(v, 7))); }, x, 30, 13)
                .max_rel_error,
            kTol);
  EXPECT_LT(check_gradient([](const ag::Var& v) { return ag::sum(ag::sample_variance(v)); }, x, 20, 14).max_rel_error,
            kTol);
}

TEST(Autograd, LocalVarianceOfConstantIsZero) {
  const Tensor out = ag::local_variance(ag::Var(Tensor({1, 1, 9, 9}, 0.3)), 7).value();
  for (double e : out.values()) EXPECT_NEAR(e, 0.0, 1e-15);
}

TEST(Autograd, GradientsAccumulateUntilZeroed) {
  ag::Var x(Tensor({3}, 1.0), true);
  ag::backward(ag::sum(ag::scale(x, 2.0)));
  ag::backward(ag::sum(ag::scale(x, 3.0)));
  EXPECT_EQ(x.grad()[0], 5.0);
  x.zero_grad();
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(Autograd, NoGradGuardRecordsNothing) {
  ag::Var x(Tensor({2}, 1.0), true);
  ag::NoGradGuard guard;
  const ag::Var y = ag::square(x);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Autograd, SpectralNormalizeBoundsLargestSingularValue) {
  ag::Var w(random_tensor({8, 4, 3, 3}, 18));
  Tensor u = random_tensor({8}, 19);
  ag::Var wn;
  for (int i = 0; i < 50; ++i) wn = ag::spectral_normalize(w, u, true);
  // Power iteration on W^T W of the [Co, Ci*K*K] matrix.
  const Tensor& m = wn.value();
  std::vector<double> v(36, 1.0);
  double sigma = 0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> wv(8, 0.0), wtwv(36, 0.0);
    for (int o = 0; o < 8; ++o)
      for (int j = 0; j < 36; ++j) wv[o] += m[o * 36 + j] * v[j];
    for (int o = 0; o < 8; ++o)
      for (int j = 0; j < 36; ++j) wtwv[j] += m[o * 36 + j] * wv[o];
    double n = 0;
    for (double e : wtwv) n += e * e;
    n = std::sqrt(n);
    sigma = std::sqrt(n);
    for (int j = 0; j < 36; ++j) v[j] = wtwv[j] / n;
  }
  EXPECT_NEAR(sigma, 1.0, 1e-6);
}

}  // namespace
}  // namespace aesop
