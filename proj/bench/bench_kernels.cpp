// Serial vs OpenMP variants of the hot kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "uosam/kernels.hpp"

using namespace uosam;

namespace {

FeatureMap random_features(int side, int channels) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> data(static_cast<std::size_t>(side) * side * channels);
  for (auto& v : data) v = g(rng);
  return FeatureMap(side, side, channels, std::move(data), 16.0, {side * 16, side * 16});
}

ForegroundFeatureSet first_cells(const FeatureMap& f, std::size_t n) {
  std::vector<float> v(f.data().begin(), f.data().begin() + static_cast<std::ptrdiff_t>(n * f.channels()));
  return ForegroundFeatureSet(f.channels(), std::move(v));
}

std::vector<ClassId> random_labels(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ClassId> out(n);
  for (auto& v : out) v = static_cast<ClassId>(rng() % classes);
  return out;
}

BinaryMask disk(int side) {
  BinaryMask m({side, side});
  const int c = side / 2;
  const int r = side / 3;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if ((x - c) * (x - c) + (y - c) * (y - c) <= r * r) m.set(x, y);
    }
  }
  return m;
}

template <auto Fn>
void BM_Confidence(benchmark::State& state) {
  const auto f = random_features(64, 256);
  const auto fg = first_cells(f, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(f, fg));
}

template <auto Fn>
void BM_Confusion(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto pred = random_labels(n, 21, 2);
  const auto gt = random_labels(n, 21, 3);
  std::vector<std::uint64_t> counts(21 * 21);
  std::vector<std::uint64_t> void_pred(21);
  for (auto _ : state) {
    Fn(pred, gt, 255, 21, counts, void_pred);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <auto Fn>
void BM_Band(benchmark::State& state) {
  const auto m = disk(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(m, 10));
}

}  // namespace

BENCHMARK(BM_Confidence<kernels::confidence_map_serial>)->Arg(64)->Arg(512);
BENCHMARK(BM_Confidence<kernels::confidence_map_parallel>)->Arg(64)->Arg(512);
BENCHMARK(BM_Confusion<kernels::confusion_serial>)->Arg(1 << 20)->Arg(1 << 23);
BENCHMARK(BM_Confusion<kernels::confusion_parallel>)->Arg(1 << 20)->Arg(1 << 23);
BENCHMARK(BM_Band<kernels::boundary_band_serial>)->Arg(512)->Arg(1024);
BENCHMARK(BM_Band<kernels::boundary_band_parallel>)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
