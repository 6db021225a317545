#include <benchmark/benchmark.h>

#include "mfood/flow.hpp"
#include "mfood/manifold.hpp"
#include "mfood/rng.hpp"

namespace {

mfood::Tensor gaussian_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  mfood::Rng rng(seed);
  mfood::Tensor t({rows, cols});
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

mfood::FlowConfig bench_config() {
  mfood::FlowConfig fc;
  fc.blocks = 4;
  fc.hidden = {64, 64};
  return fc;
}

void BM_FlowForward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto model = mfood::FlowModel::build(dim, bench_config(), 1);
  const auto x = gaussian_batch(128, dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_FlowForward)->Arg(2)->Arg(16)->Arg(196);

void BM_FlowInverse(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto model = mfood::FlowModel::build(dim, bench_config(), 1);
  const auto z = gaussian_batch(128, dim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(model.inverse(z));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_FlowInverse)->Arg(2)->Arg(16)->Arg(196);

// One training step's worth of work: loss, forward/inverse tapes and backprop.
void BM_LossAndGradient(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  mfood::ManifoldFlowModel model;
  model.split = {dim / 4 == 0 ? 1 : dim / 4, dim};
  model.base = mfood::FlowModel::build(dim, bench_config(), 4);
  const auto x = gaussian_batch(128, dim, 5);
  const mfood::PenaltySpec spec{mfood::PenaltyKind::kHuber, 0.1, 1.0};
  for (auto _ : state) {
    mfood::zero_grad(model);
    benchmark::DoNotOptimize(mfood::loss_and_gradient(model, x, spec));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_LossAndGradient)->Arg(2)->Arg(16)->Arg(196);

}  // namespace
