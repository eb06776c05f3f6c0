#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "radloc/occupancy.hpp"
#include "radloc/pipeline.hpp"
#include "radloc/radar_scan.hpp"
#include "radloc/registration.hpp"
#include "radloc/simulator.hpp"
#include "radloc/smoother.hpp"

namespace {

using namespace radloc;

constexpr std::uint64_t kSeed = 7;

// Built once; the urban world is the most expensive preset to rasterize.
struct Fixture {
  Scenario scenario = default_scenario("urban", kSeed);
  WorldMap world = build_world("urban", kSeed);
  std::vector<TimedPose> trajectory = generate_trajectory(scenario.trajectory);
  PolarScan scan = simulate_scan(world, trajectory[40].pose, scenario.radar, kSeed, trajectory[40].timestamp);
  PolarScan next = simulate_scan(world, trajectory[41].pose, scenario.radar, kSeed + 1, trajectory[41].timestamp);
  OccupancyImage overhead = degrade_overhead(world, scenario.overhead, kSeed);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_KStrongest(benchmark::State& state) {
  const PolarScan& scan = fixture().scan;
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(k_strongest(scan, k));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * scan.azimuth_count()));
}
BENCHMARK(BM_KStrongest)->Arg(1)->Arg(5)->Arg(12);

void BM_SimulateScan(benchmark::State& state) {
  const Fixture& f = fixture();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_scan(f.world, f.trajectory[40].pose, f.scenario.radar, ++seed));
  }
}
BENCHMARK(BM_SimulateScan)->Unit(benchmark::kMillisecond);

void BM_OdometryIcp(benchmark::State& state) {
  const Fixture& f = fixture();
  const PointCloud2D source = k_strongest(f.next, 5);
  const PointCloud2D target = k_strongest(f.scan, 5);
  const IcpConfig config = PipelineConfig{}.odometry_icp();
  for (auto _ : state) benchmark::DoNotOptimize(icp(source, target, Pose2(), config));
  state.counters["points"] = static_cast<double>(source.size());
}
BENCHMARK(BM_OdometryIcp)->Unit(benchmark::kMillisecond);

void BM_ToPolar(benchmark::State& state) {
  const Fixture& f = fixture();
  const PipelineConfig config;
  const FetchedPatch patch =
      fetch_patch(f.overhead, f.trajectory[40].pose, config.patch_size, config.meters_per_pixel);
  for (auto _ : state) {
    benchmark::DoNotOptimize(to_polar(patch.image, config.polar_azimuths, config.polar_range_bins));
  }
}
BENCHMARK(BM_ToPolar)->Unit(benchmark::kMillisecond);

// Window of n states with a unary factor on every fourth state, as in a 10 s
// window at 4 Hz with partial gating.
FactorGraph make_window(std::size_t n) {
  FactorGraph g;
  const Pose2 step(2.0, 0.05, 0.02);
  Pose2 truth;
  for (std::size_t i = 0; i < n; ++i) {
    g.states.push_back({0.25 * static_cast<double>(i), truth * Pose2(0.1, -0.1, 0.01)});
    if (i > 0) g.odometry.push_back({i - 1, i, step, default_odometry_noise()});
    if (i % 4 == 0) g.unary.push_back({i, truth, default_unary_noise(), 0.8});
    truth = truth * step;
  }
  g.priors.push_back({0, g.states.front().pose, Matrix3::Identity() * 100.0});
  return g;
}

void BM_Optimize(benchmark::State& state) {
  const FactorGraph base = make_window(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    FactorGraph g = base;
    benchmark::DoNotOptimize(optimize(g));
  }
}
BENCHMARK(BM_Optimize)->Arg(10)->Arg(40)->Arg(80)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
