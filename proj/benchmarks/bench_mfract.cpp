#include <benchmark/benchmark.h>

#include "mfract/mfract.hpp"

using namespace mfract;

namespace {

GrayImage noise(std::size_t h, std::size_t w, std::uint64_t seed = 1) {
  Rng rng(seed);
  RealGrid g(h, w);
  for (double& v : g.values()) v = rng.uniform();
  return GrayImage(std::move(g));
}

void BM_MeasureStack(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const GrayImage img = noise(n, n);
  const density::DensityFitConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(density::measure_stack(img, cfg));
}
BENCHMARK(BM_MeasureStack)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

// Exact and closed-form fits on the same stack; compare the two at 512.
void BM_DensityExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const density::DensityFitConfig cfg;
  const density::MeasureStack s = density::measure_stack(noise(n, n), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(density::density_exact(s, cfg));
}
BENCHMARK(BM_DensityExact)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_DensityClosedForm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const density::DensityFitConfig cfg;
  const density::MeasureStack s = density::measure_stack(noise(n, n), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(density::density_closed_form(s, cfg));
}
BENCHMARK(BM_DensityClosedForm)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BoxCountGray(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const GrayImage img = noise(n, n);
  const auto sizes = boxcount::default_sizes(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(boxcount::box_count_gray(img, sizes));
}
BENCHMARK(BM_BoxCountGray)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Spectrum(benchmark::State& state) {
  const GrayImage img = noise(256, 256);
  for (auto _ : state) benchmark::DoNotOptimize(mfspec::spectrum_from_image(img));
}
BENCHMARK(BM_Spectrum)->Unit(benchmark::kMillisecond);

void BM_Fft2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RealGrid x = noise(n, n).pixels();
  for (auto _ : state) benchmark::DoNotOptimize(spectral::fft2(x));
}
// 509 is prime.
BENCHMARK(BM_Fft2)->Arg(512)->Arg(509)->Unit(benchmark::kMillisecond);

void BM_LowpassFilter(benchmark::State& state) {
  const RealGrid x = noise(512, 512).pixels();
  const spectral::AttentionMap a = spectral::AttentionMap::lowpass(512, 512, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral::apply_filter(x, a));
}
BENCHMARK(BM_LowpassFilter)->Unit(benchmark::kMillisecond);

void BM_MfbForward(benchmark::State& state) {
  const GrayImage img = noise(128, 128);
  for (auto _ : state) benchmark::DoNotOptimize(grouping::mfb_forward(img));
}
BENCHMARK(BM_MfbForward)->Unit(benchmark::kMillisecond);

void BM_ChainCheck(benchmark::State& state) {
  const diffusion::NoiseSchedule s = diffusion::linear_schedule();
  const RealGrid x0 = noise(8, 8).pixels();
  for (auto _ : state) benchmark::DoNotOptimize(diffusion::chain_equals_marginal(x0, 100, s, 1, 1000));
}
BENCHMARK(BM_ChainCheck)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
