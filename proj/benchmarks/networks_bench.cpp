#include <benchmark/benchmark.h>

#include "aesop/autoencoder.hpp"
#include "aesop/losses.hpp"
#include "aesop/networks.hpp"
#include "aesop/synthetic.hpp"

namespace {

using namespace aesop;

// Tiny-preset generator (2 RRDBs, 16 base, 8 growth) on one LR patch of side range(0).
void BM_GeneratorForward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Generator gen(GeneratorConfig{.num_rrdb_blocks = 2, .base_channels = 16, .growth_channels = 8, .scale = 4}, 1);
  const ImageTensor lr = synthetic_image(side, side, 5).as_batch();
  for (auto _ : state) benchmark::DoNotOptimize(run_network(gen, lr).tensor().values().data());
}
BENCHMARK(BM_GeneratorForward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

// One AESOP loss evaluation with backward through a frozen tiny autoencoder.
void BM_AesopLossBackward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const GeneratorConfig dec{.num_rrdb_blocks = 2, .base_channels = 16, .growth_channels = 8, .scale = 4};
  AutoEncoder ae(EncoderConfig{.scale = 4, .rrdb_channels = 16}, dec, 2);
  ae.set_pretrain_complete(true);
  ae.freeze();
  const ag::Var hr(synthetic_image(side, side, 6).as_batch().tensor(), false);
  const ag::Var sr(synthetic_image(side, side, 7).as_batch().tensor(), true);
  for (auto _ : state) {
    ag::backward(loss_aesop(sr, hr, ae, 1));
    benchmark::DoNotOptimize(sr.grad().values().data());
  }
}
BENCHMARK(BM_AesopLossBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
