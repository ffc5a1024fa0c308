#include <benchmark/benchmark.h>

#include "aesop/autograd.hpp"
#include "aesop/metrics.hpp"
#include "aesop/ops.hpp"
#include "aesop/resample.hpp"
#include "aesop/spectral.hpp"
#include "aesop/synthetic.hpp"

namespace {

using namespace aesop;

Tensor ramp(Shape shape) {
  Tensor t(std::move(shape));
  double v = 0.0;
  for (double& x : t.values()) x = (v += 0.618034) - static_cast<long>(v) - 0.5;
  return t;
}

// Args: channels, spatial side.
void BM_Conv3x3Forward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const ag::Var x(ramp({1, c, side, side}), false);
  const ag::Var w(ramp({c, c, 3, 3}), false);
  const ag::Var b(Tensor({c}, 0.0), false);
  for (auto _ : state) benchmark::DoNotOptimize(ag::conv2d(x, w, b, 1, 1).value().values().data());
  state.SetItemsProcessed(state.iterations() * c * c * 9LL * side * side);
}
BENCHMARK(BM_Conv3x3Forward)->Args({16, 32})->Args({32, 32})->Args({32, 64})->Args({64, 64});

void BM_Conv3x3ForwardBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const ag::Var x(ramp({1, c, side, side}), true);
  const ag::Var w(ramp({c, c, 3, 3}), true);
  const ag::Var b(Tensor({c}, 0.0), true);
  for (auto _ : state) {
    ag::backward(ag::sum(ag::conv2d(x, w, b, 1, 1)));
    benchmark::DoNotOptimize(w.grad().values().data());
  }
  state.SetItemsProcessed(state.iterations() * 3LL * c * c * 9 * side * side);
}
BENCHMARK(BM_Conv3x3ForwardBackward)->Args({16, 32})->Args({32, 64});

void BM_BicubicDownsample(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ImageTensor img = synthetic_image(side, side, 3);
  const ResampleSpec spec{.scale = 4};
  for (auto _ : state) benchmark::DoNotOptimize(bicubic_downsample(img, spec).tensor().values().data());
  state.SetItemsProcessed(state.iterations() * 3LL * side * side);
}
BENCHMARK(BM_BicubicDownsample)->Arg(128)->Arg(512);

void BM_Ssim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ImageTensor a = synthetic_image(side, side, 3);
  const ImageTensor b = synthetic_image(side, side, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Ssim)->Arg(128)->Arg(512);

void BM_LowpassFilter(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ImageTensor img = synthetic_image(side, side, 3);
  for (auto _ : state) benchmark::DoNotOptimize(lowpass_filter(img, 0.125).tensor().values().data());
  state.SetItemsProcessed(state.iterations() * 3LL * side * side);
}
BENCHMARK(BM_LowpassFilter)->Arg(128)->Arg(512);

}  // namespace
