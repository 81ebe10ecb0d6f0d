#include <benchmark/benchmark.h>

#include <random>

#include "velest/disparity_fusion.hpp"
#include "velest/experiments.hpp"
#include "velest/scenario_config.hpp"

using namespace velest;

namespace {

DisparityMap random_map(std::size_t w, std::size_t h, Exposure exposure, std::uint64_t seed) {
  DisparityMap map(w, h, exposure);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> disp(1.0, 60.0);
  std::uniform_real_distribution<double> rel(0.0, 8.0);
  std::bernoulli_distribution present(0.6);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (present(rng)) map.set(x, y, {disp(rng), rel(rng)});
    }
  }
  return map;
}

void BM_FuseSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t1 = random_map(n, n, Exposure::T1, 1);
  const auto t2 = random_map(n, n, Exposure::T2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(serial::fuse_disparity_maps(t1, t2));
}

void BM_FuseParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t1 = random_map(n, n, Exposure::T1, 1);
  const auto t2 = random_map(n, n, Exposure::T2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fuse_disparity_maps(t1, t2));
}

void BM_HistogramSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto map = random_map(n, n, Exposure::T1, 3);
  const PixelRect roi{0, 0, n, n};
  const auto model = CameraModel::from_stereo_constant(kDefaultStereoConstant);
  for (auto _ : state) benchmark::DoNotOptimize(serial::compute_depth_histogram(map, roi, model));
}

void BM_HistogramParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto map = random_map(n, n, Exposure::T1, 3);
  const PixelRect roi{0, 0, n, n};
  const auto model = CameraModel::from_stereo_constant(kDefaultStereoConstant);
  for (auto _ : state) benchmark::DoNotOptimize(compute_depth_histogram(map, roi, model));
}

void BM_SeedsSerial(benchmark::State& state) {
  const RunConfig config = load_run_config(nlohmann::json::object(), "fig14-rain-decel");
  const auto seeds = seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_seeds_serial(config, seeds));
}

void BM_SeedsParallel(benchmark::State& state) {
  const RunConfig config = load_run_config(nlohmann::json::object(), "fig14-rain-decel");
  const auto seeds = seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_seeds(config, seeds));
}

}  // namespace

BENCHMARK(BM_FuseSerial)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_FuseParallel)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_HistogramSerial)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_HistogramParallel)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_SeedsSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SeedsParallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
