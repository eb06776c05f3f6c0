#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "radloc/simulator.hpp"

namespace radloc {

/// Map-frame error of one estimate: lat is north (y), long is east (x).
struct ErrorSample {
  double timestamp = 0.0;
  double lat = 0.0;      // m, estimate - truth
  double lon = 0.0;      // m, estimate - truth
  double yaw_deg = 0.0;  // |wrapped difference|, in [0, 180]
};

/// Uniform bins over [lower, upper); values outside land in below/above.
struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;
  std::size_t below = 0;
  std::size_t above = 0;

  double bin_width() const { return counts.empty() ? 0.0 : (upper - lower) / static_cast<double>(counts.size()); }
};

struct TrajectoryErrorReport {
  std::vector<ErrorSample> errors;
  double rmse_translation = 0.0;
  double rmse_lat = 0.0;
  double rmse_long = 0.0;
  double rmse_yaw = 0.0;  // deg
  Histogram lat_histogram;
  Histogram long_histogram;
  std::size_t skipped = 0;  // estimates outside the ground-truth time span
};

/// Ground truth at time t: linear in position, shortest arc in yaw.
/// nullopt outside [front.timestamp, back.timestamp]. `truth` must be sorted.
std::optional<Pose2> interpolate_pose(const std::vector<TimedPose>& truth, double t);

/// `bins` uniform bins over mean +- 3 sigma (population sigma). A zero spread
/// uses mean +- 0.5.
Histogram make_histogram(const std::vector<double>& values, std::size_t bins = 50);

/// Scores estimates against interpolated ground truth in the shared map frame,
/// without any alignment. Throws std::invalid_argument when no estimate falls
/// inside the ground-truth time span or truth timestamps are not increasing.
TrajectoryErrorReport align_and_score(const std::vector<TimedPose>& estimated, const std::vector<TimedPose>& truth,
                                      std::size_t histogram_bins = 50);

/// Reads a CSV with a header naming `t` or `timestamp`, `x`, `y`, `theta`
/// columns; other columns are ignored.
std::vector<TimedPose> read_trajectory_csv(const std::filesystem::path& path);
/// Writes timestamp,x,y,theta with 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TimedPose>& trajectory);

/// time,lat,long,yaw_deg rows.
void write_errors_csv(const std::filesystem::path& path, const TrajectoryErrorReport& report);
/// axis,bin_lower,bin_upper,count rows for both axes, with below/above rows.
void write_histogram_csv(const std::filesystem::path& path, const TrajectoryErrorReport& report);

}  // namespace radloc
