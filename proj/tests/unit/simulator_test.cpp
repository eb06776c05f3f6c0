#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "generators.hpp"
#include "radloc/simulator.hpp"

namespace radloc {
namespace {

constexpr double kPi = std::numbers::pi;

WorldMap walled_world(double wall_x) {
  WorldMap w = build_world("empty", 0);
  fill_box(w.raster, {wall_x, -100.0, wall_x + 2.0, 100.0});
  return w;
}

RadarSimConfig short_radar() {
  RadarSimConfig cfg;
  cfg.azimuth_count = 64;
  cfg.max_range = 60.0;
  return cfg;
}

TEST(DeriveSeed, StreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(7, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
}

TEST(BuildWorld, BinaryDeterministicAndKnownPresets) {
  for (const auto& preset : world_presets()) {
    const WorldMap a = build_world(preset, 3);
    const WorldMap b = build_world(preset, 3);
    EXPECT_EQ(a.raster.values(), b.raster.values()) << preset;
    EXPECT_DOUBLE_EQ(a.raster.meters_per_pixel(), kWorldMetersPerPixel);
    EXPECT_TRUE(std::all_of(a.raster.values().begin(), a.raster.values().end(),
                            [](double v) { return v == 0.0 || v == 1.0; }))
        << preset;
  }
  EXPECT_THROW(build_world("moon", 1), std::invalid_argument);
}

TEST(BuildWorld, CorridorWallsAndSeededPilasters) {
  const WorldMap c = build_world("corridor", 1);
  EXPECT_EQ(c.raster.lookup_map({100.0, 10.5}), 1.0);
  EXPECT_EQ(c.raster.lookup_map({100.0, -10.5}), 1.0);
  EXPECT_EQ(c.raster.lookup_map({100.0, 0.0}), 0.0);
  EXPECT_NE(build_world("corridor", 2).raster.values(), c.raster.values());
}

TEST(SimulateScan, EmptyWorldIsSilent) {
  const PolarScan s = simulate_scan(build_world("empty", 0), Pose2(), short_radar(), 1);
  EXPECT_TRUE(std::all_of(s.data().begin(), s.data().end(), [](float v) { return v == 0.0f; }));
  EXPECT_EQ(s.range_bin_count(), short_radar().range_bin_count());
}

TEST(SimulateScan, WallRangeWithinOneBin) {
  const double wall = 23.7;
  const WorldMap w = walled_world(wall);
  const RadarSimConfig cfg = short_radar();
  const PolarScan s = simulate_scan(w, Pose2(0.0, 0.0, 0.0), cfg, 1, 2.5);
  EXPECT_DOUBLE_EQ(s.timestamp(), 2.5);
  const auto row = s.row(0);
  const auto peak = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  EXPECT_EQ(row[peak], 1.0f);
  EXPECT_NEAR(s.bin_range(peak), wall, cfg.range_resolution + kWorldMetersPerPixel / 2.0);
  EXPECT_FLOAT_EQ(row[peak - 1], 0.25f);
  EXPECT_FLOAT_EQ(row[peak + 1], 0.25f);
  // The beam pointing away from the wall sees nothing.
  const auto back = s.row(32);
  EXPECT_TRUE(std::all_of(back.begin(), back.end(), [](float v) { return v == 0.0f; }));
}

TEST(SimulateScan, SensorHeadingRotatesTheImage) {
  const WorldMap w = walled_world(20.0);
  const PolarScan s = simulate_scan(w, Pose2(0.0, 0.0, kPi / 2.0), short_radar(), 1);
  // Wall is at sensor azimuth -90 deg, i.e. index 48 of 64.
  const auto row = s.row(48);
  EXPECT_GT(*std::max_element(row.begin(), row.end()), 0.9f);
}

TEST(SimulateScan, ClutterCountMatchesPoissonMean) {
  RadarSimConfig cfg = short_radar();
  cfg.clutter_rate = 20.0;
  const WorldMap w = build_world("empty", 0);
  const int scans = 400;
  double total = 0.0;
  for (int i = 0; i < scans; ++i) {
    const PolarScan s = simulate_scan(w, Pose2(), cfg, derive_seed(5, static_cast<std::uint64_t>(i)));
    total += static_cast<double>(std::count_if(s.data().begin(), s.data().end(), [](float v) { return v > 0.0f; }));
  }
  const double mean = total / scans;
  const double se = std::sqrt(cfg.clutter_rate / scans);
  // Coinciding cells undercount by roughly rate^2 / (2 * cells), negligible here.
  EXPECT_NEAR(mean, cfg.clutter_rate, 3.0 * se);
}

TEST(SimulateScan, DropoutBlanksWholeAzimuths) {
  WorldMap w = build_world("empty", 0);
  fill_box(w.raster, {-30.0, -30.0, 30.0, 30.0});
  fill_box(w.raster, {-25.0, -25.0, 25.0, 25.0}, 0.0);  // hollow room, every beam hits
  RadarSimConfig cfg = short_radar();
  cfg.azimuth_count = 400;
  cfg.dropout_prob = 0.2;
  std::size_t blank = 0;
  std::size_t rows = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PolarScan s = simulate_scan(w, Pose2(), cfg, seed);
    for (std::size_t a = 0; a < s.azimuth_count(); ++a, ++rows) {
      const auto r = s.row(a);
      blank += std::all_of(r.begin(), r.end(), [](float v) { return v == 0.0f; });
    }
  }
  const double p = static_cast<double>(blank) / static_cast<double>(rows);
  EXPECT_NEAR(p, 0.2, 3.0 * std::sqrt(0.2 * 0.8 / static_cast<double>(rows)));
}

TEST(SimulateScan, DeterministicUnderSeed) {
  const WorldMap w = build_world("urban", 1);
  RadarSimConfig cfg;
  cfg.noise_floor_sigma = 0.02;
  cfg.clutter_rate = 20.0;
  cfg.dropout_prob = 0.05;
  cfg.occluders.push_back({Pose2(10.0, 3.0, 0.0), {2.25, 0.9}, {1.0, 0.0}});
  const PolarScan a = simulate_scan(w, Pose2(0.0, 0.0, 0.3), cfg, 99, 1.0);
  const PolarScan b = simulate_scan(w, Pose2(0.0, 0.0, 0.3), cfg, 99, 1.0);
  const PolarScan c = simulate_scan(w, Pose2(0.0, 0.0, 0.3), cfg, 100, 1.0);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  EXPECT_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST(SimulateScan, OccluderBlocksTheWall) {
  const WorldMap w = walled_world(30.0);
  RadarSimConfig cfg = short_radar();
  cfg.occluders.push_back({Pose2(10.0, 0.0, 0.0), {1.0, 1.0}, {0.0, 0.0}});
  const PolarScan s = simulate_scan(w, Pose2(), cfg, 1);
  const auto row = s.row(0);
  const auto peak = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  EXPECT_NEAR(s.bin_range(peak), 9.0, 0.3);
  EXPECT_EQ(cfg.occluders[0].pose_at(2.0).x(), 10.0);
  const Occluder moving{Pose2(1.0, 2.0, 0.5), {1.0, 1.0}, {2.0, -1.0}};
  EXPECT_NEAR(moving.pose_at(3.0).x(), 7.0, 1e-12);
  EXPECT_NEAR(moving.pose_at(3.0).y(), -1.0, 1e-12);
  EXPECT_NEAR(moving.pose_at(3.0).theta(), 0.5, 1e-12);
}

TEST(Trajectory, SpacingHeadingAndTimes) {
  TrajectorySpec spec;
  spec.waypoints = {{0.0, 0.0}, {20.0, 0.0}, {20.0, 10.0}};
  spec.speed = 4.0;
  spec.scan_rate = 4.0;
  EXPECT_DOUBLE_EQ(path_length(spec), 30.0);
  const auto traj = generate_trajectory(spec);
  ASSERT_EQ(traj.size(), 31u);
  for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_DOUBLE_EQ(traj[i].timestamp, 0.25 * static_cast<double>(i));
  EXPECT_NEAR(traj[5].pose.theta(), 0.0, 1e-12);
  EXPECT_NEAR(traj[20].pose.theta(), kPi / 2.0, 1e-12);  // outgoing segment wins
  EXPECT_NEAR(traj.back().pose.y(), 10.0, 1e-12);
}

TEST(Trajectory, FilletShortensEachRightAngleCorner) {
  TrajectorySpec spec;
  spec.waypoints = {{0.0, 0.0}, {100.0, 0.0}, {100.0, 100.0}, {0.0, 100.0}};
  const double sharp = path_length(spec);
  spec.turn_radius = 10.0;
  EXPECT_NEAR(sharp - path_length(spec), 2.0 * (2.0 * 10.0 - kPi / 2.0 * 10.0), 1e-9);
  const auto traj = generate_trajectory(spec);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    EXPECT_NEAR((traj[i].pose.translation() - traj[i - 1].pose.translation()).norm(), 1.25, 0.01);
    EXPECT_LT(std::abs(normalize_angle(traj[i].pose.theta() - traj[i - 1].pose.theta())), 1.25 / 10.0 + 1e-9);
  }
}

TEST(Trajectory, ValidateRejectsDegenerateSpecs) {
  TrajectorySpec spec;
  spec.waypoints = {{0.0, 0.0}};
  EXPECT_THROW(generate_trajectory(spec), std::invalid_argument);
  spec.waypoints = {{0.0, 0.0}, {1.0, 0.0}};
  spec.speed = 0.0;
  EXPECT_THROW(generate_trajectory(spec), std::invalid_argument);
}

TEST(DegradeOverhead, BlockMeanDropoutAndClamp) {
  const WorldMap w = build_world("urban", 4);
  OverheadDegradation d;
  d.output_meters_per_pixel = 2.0 * kWorldMetersPerPixel;
  const OccupancyImage plain = degrade_overhead(w, d, 1);
  ASSERT_EQ(plain.width(), w.raster.width() / 2);
  for (std::size_t r : {10u, 200u, 333u}) {
    for (std::size_t c : {7u, 150u, 401u}) {
      const double mean = (w.raster.at(2 * r, 2 * c) + w.raster.at(2 * r + 1, 2 * c) + w.raster.at(2 * r, 2 * c + 1) +
                           w.raster.at(2 * r + 1, 2 * c + 1)) / 4.0;
      EXPECT_NEAR(plain.at(r, c), mean, 1e-12);
    }
  }
  d.blur_sigma = 1.0;
  d.dropout_regions.push_back({0.0, 0.0, 30.0, 30.0});
  d.random_dropouts = 3;
  d.occupancy_bias = 0.3;
  const OccupancyImage degraded = degrade_overhead(w, d, 1);
  EXPECT_NO_THROW(degraded.validate());
  EXPECT_EQ(degraded.lookup_map({15.0, 15.0}), 0.3);
  EXPECT_EQ(degrade_overhead(w, d, 1).values(), degraded.values());
}

TEST(SimulateLabels, LabelIsOccupancyAndMaskStopsAtFirstHit) {
  WorldMap w = build_world("empty", 0);
  fill_box(w.raster, {10.0, -50.0, 14.0, 50.0});
  const OccupancyImage grid(120, 120, 0.5);
  const std::vector<TimedPose> poses{{0.0, Pose2()}};
  const OccupancyLabels l = simulate_labels(w, grid, poses, {720, 40.0, 1});
  EXPECT_NO_THROW(l.validate());
  auto idx = [&](const Point2& p) {
    const Point2 uv = grid.map_to_pixel(p);
    return static_cast<std::size_t>(std::lround(uv.y())) * grid.width() + static_cast<std::size_t>(std::lround(uv.x()));
  };
  EXPECT_EQ(l.mask[idx({5.0, 0.0})], 1);
  EXPECT_EQ(l.label[idx({5.0, 0.0})], 0);
  EXPECT_EQ(l.mask[idx({10.25, 0.0})], 1);
  EXPECT_EQ(l.label[idx({10.25, 0.0})], 1);
  EXPECT_EQ(l.mask[idx({13.0, 0.0})], 0);  // behind the first occupied pixel
  EXPECT_EQ(l.label[idx({13.0, 0.0})], 1);
}

TEST(DefaultScenario, PresetLengthsAndSettings) {
  const Scenario urban = default_scenario("urban", 7);
  EXPECT_GE(path_length(urban.trajectory), 500.0);
  EXPECT_EQ(urban.radar.clutter_rate, 20.0);
  const Scenario corridor = default_scenario("corridor", 7);
  EXPECT_EQ(corridor.radar.clutter_rate, 0.0);
  EXPECT_EQ(corridor.radar.noise_floor_sigma, 0.0);
  EXPECT_EQ(corridor.radar.dropout_prob, 0.0);
  EXPECT_EQ(corridor.overhead.blur_sigma, 0.0);
  EXPECT_THROW(default_scenario("moon", 7), std::invalid_argument);
}

}  // namespace
}  // namespace radloc
