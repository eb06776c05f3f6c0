#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radloc/occupancy.hpp"
#include "radloc/radar_scan.hpp"
#include "radloc/se2.hpp"

namespace radloc {

inline constexpr double kWorldMetersPerPixel = 0.2165;  // half the overhead resolution
inline constexpr double kDefaultMaxRange = 140.0;       // m
inline constexpr double kDefaultScanRate = 4.0;         // Hz

/// SplitMix64 finalizer; derives independent stream seeds from one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Ground-truth world: raster values are exactly 0 or 1.
struct WorldMap {
  OccupancyImage raster;
  std::string preset;
  std::uint64_t seed = 0;
};

/// Axis-aligned rectangle in the map frame.
struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(const Point2& p) const { return p.x() >= min_x && p.x() <= max_x && p.y() >= min_y && p.y() <= max_y; }
};

/// Sets to 1 every pixel whose center lies inside `box`.
void fill_box(OccupancyImage& raster, const Box& box, double value = 1.0);

/// "empty", "corridor", "urban", "suburban", "marine".
const std::vector<std::string>& world_presets();

/// Deterministic raster for (preset, seed) at kWorldMetersPerPixel.
/// - corridor: inner wall faces at y = +-10 m, 1 m thick, x in [-20, 280] with
///   end caps and seeded pilasters 1.5-3 m deep every 5-10 m on the inner faces.
/// - urban: building blocks between streets on a 75 m x 50 m grid.
/// - suburban: sparse detached structures and trees on the same street grid.
/// - marine: shoreline band near y = 40 m with piers, all within y > 10 m.
/// Throws std::invalid_argument for an unknown preset.
WorldMap build_world(const std::string& preset, std::uint64_t seed);

/// Rigid box moving at constant velocity; pose at time t is
/// (start.x + vx t, start.y + vy t, start.theta).
struct Occluder {
  Pose2 start;
  Point2 half_extent{2.25, 0.9};
  Point2 velocity{0.0, 0.0};  // m/s, map frame

  Pose2 pose_at(double t) const;
};

struct RadarSimConfig {
  std::size_t azimuth_count = kDefaultAzimuthCount;
  double range_resolution = kDefaultRangeResolution;
  double max_range = kDefaultMaxRange;
  double return_intensity = 1.0;
  double leakage = 0.25;         // fraction deposited in the +-1 bins
  double noise_floor_sigma = 0.0;
  double clutter_rate = 0.0;     // expected spurious detections per scan
  double dropout_prob = 0.0;     // per azimuth
  std::vector<Occluder> occluders;

  /// floor(max_range / range_resolution).
  std::size_t range_bin_count() const;
  void validate() const;
};

/// Ray-marched scan. Along each azimuth the ray steps by range_resolution;
/// when step s lands in an occupied cell, bin s - 1 receives the return and
/// bins s - 2 and s receive leakage. Noise floor, clutter and dropout follow
/// in that order. Occluders are evaluated at `timestamp`.
PolarScan simulate_scan(const WorldMap& world, const Pose2& pose, const RadarSimConfig& config, std::uint64_t seed,
                        double timestamp = 0.0);

struct OverheadDegradation {
  double output_meters_per_pixel = 0.0;  // 0 keeps the world resolution
  double blur_sigma = 0.0;               // m
  std::vector<Box> dropout_regions;      // zeroed
  std::size_t random_dropouts = 0;       // extra seeded square regions
  double random_dropout_size = 20.0;     // m, side length
  double occupancy_bias = 0.0;

  void validate() const;
};

/// Blur at world resolution, resample (block mean for integer ratios,
/// bilinear otherwise), zero the dropout regions, add the bias, clamp to [0, 1].
OccupancyImage degrade_overhead(const WorldMap& world, const OverheadDegradation& params, std::uint64_t seed);

struct TrajectorySpec {
  std::vector<Point2> waypoints;
  double speed = 5.0;                   // m/s
  double scan_rate = kDefaultScanRate;  // Hz
  double turn_radius = 0.0;             // m, 0 for sharp corners
  double start_time = 0.0;              // s

  void validate() const;
};

struct TimedPose {
  double timestamp = 0.0;
  Pose2 pose;
};

/// Arc length of the (possibly filleted) path.
double path_length(const TrajectorySpec& spec);

/// Constant-speed samples every speed / scan_rate meters, including s = 0.
/// Heading follows the path tangent; at a sharp corner the outgoing segment
/// wins.
std::vector<TimedPose> generate_trajectory(const TrajectorySpec& spec);

struct LabelOptions {
  std::size_t azimuth_count = 720;
  double max_range = kDefaultMaxRange;
  std::size_t pose_stride = 4;
};

/// Training-style targets on `grid`'s pixel lattice: label is world occupancy
/// at each pixel center, mask marks pixels crossed by rays cast from the
/// poses up to and including the first occupied pixel.
OccupancyLabels simulate_labels(const WorldMap& world, const OccupancyImage& grid, const std::vector<TimedPose>& poses,
                                const LabelOptions& options = {});

/// Built-in scenario for a preset: trajectory, radar and overhead settings.
struct Scenario {
  std::string preset;
  std::uint64_t seed = 0;
  TrajectorySpec trajectory;
  RadarSimConfig radar;
  OverheadDegradation overhead;
};

/// - corridor: straight centerline run x 0 -> 240 m, noise free, undegraded.
/// - urban: 150 m x 100 m street loop with 15 m fillets, continued 40 m past
///   the start (>= 500 m); clutter 20, no noise floor, moving vehicles, mild
///   overhead blur.
/// - suburban, marine, empty: analogous, see the implementation.
Scenario default_scenario(const std::string& preset, std::uint64_t seed);

}  // namespace radloc
