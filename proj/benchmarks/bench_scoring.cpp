#include <benchmark/benchmark.h>

#include <vector>

#include "mfood/complexity.hpp"
#include "mfood/huber_density.hpp"
#include "mfood/rng.hpp"
#include "mfood/scoring.hpp"

namespace {

std::vector<double> normals(std::size_t n, double shift, std::uint64_t seed) {
  mfood::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() + shift;
  return v;
}

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto labeled = mfood::EvalLabeling::from(normals(n, 0.0, 1), normals(n, 0.5, 2));
  for (auto _ : state) benchmark::DoNotOptimize(mfood::auroc(labeled));
  state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

void BM_FitScaleNewton(benchmark::State& state) {
  const auto errors = normals(static_cast<std::size_t>(state.range(0)), 0.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mfood::fit_scale_newton(errors, 0.5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitScaleNewton)->Arg(8000)->Arg(1000000);

void BM_ComplexityBits(benchmark::State& state) {
  mfood::Rng rng(4);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = rng.uniform() < 0.8 ? 0.0 : rng.uniform();
  const auto q = mfood::quantize(x);
  const mfood::DeflateCodec codec;
  for (auto _ : state) benchmark::DoNotOptimize(mfood::complexity_bits(q, codec));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComplexityBits)->Arg(196)->Arg(3072);

}  // namespace
