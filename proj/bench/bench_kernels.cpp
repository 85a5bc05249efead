#include <benchmark/benchmark.h>

#include "orthosfm/noise_study.hpp"
#include "orthosfm/scene_sim.hpp"
#include "orthosfm/two_frame.hpp"

namespace {

using namespace orthosfm;

std::vector<FrameObservation> match_frames(std::size_t n) {
  return render(gen_scene(n, 2, 42));
}

void BM_MatchParallel(benchmark::State& state) {
  const auto frames = match_frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(match_points(frames[0], frames[1]));
}

void BM_MatchSerial(benchmark::State& state) {
  const auto frames = match_frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::match_points(frames[0], frames[1]));
}

NoiseStudyConfig study(std::size_t trials) {
  NoiseStudyConfig c;
  c.trials = trials;
  c.seed = 7;
  return c;
}

void BM_NoiseStudyParallel(benchmark::State& state) {
  const auto c = study(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_noise_study(c));
}

void BM_NoiseStudySerial(benchmark::State& state) {
  const auto c = study(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::run_noise_study(c));
}

}  // namespace

BENCHMARK(BM_MatchParallel)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchSerial)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseStudyParallel)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseStudySerial)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
