#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "radloc/radar_scan.hpp"
#include "radloc/se2.hpp"

namespace radloc {

inline constexpr std::size_t kDefaultPatchSize = 640;
inline constexpr double kOverheadMetersPerPixel = 0.433;
inline constexpr double kDefaultOccupancyThreshold = 0.6;
inline constexpr double kDefaultDiceWeight = 0.5;
inline constexpr double kLossEpsilon = 1e-7;

// Lidar label-generation constants. Label generation from real point clouds
// is not implemented here; the simulator emits labels directly.
inline constexpr double kLidarMinHeight = 0.0;  // m, sensor frame, z up
inline constexpr double kLidarMaxHeight = 3.0;  // m
inline constexpr double kLidarIntensityThreshold = 0.04;

/// Georeferenced raster of occupancy probabilities in [0, 1]. Row 0 is the
/// northern (+y) edge, column 0 the western (-x) edge. `origin` is the map
/// pose of the image center; rotation is 0 by convention.
class OccupancyImage {
 public:
  OccupancyImage() = default;
  OccupancyImage(std::size_t width, std::size_t height, double meters_per_pixel, Pose2 origin = {},
                 double fill = 0.0);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double meters_per_pixel() const { return meters_per_pixel_; }
  const Pose2& origin() const { return origin_; }
  void set_origin(const Pose2& origin) { origin_ = origin; }

  double at(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Map-frame position of a pixel center.
  Point2 pixel_center(std::size_t row, std::size_t col) const;
  /// Continuous (col, row) coordinates of a map point; pixel centers are integral.
  Point2 map_to_pixel(const Point2& map_point) const;
  /// Continuous (col, row) coordinates of a point given relative to the image center.
  Point2 local_to_pixel(const Point2& local_point) const;

  /// Bilinear sample at a point relative to the image center. Neighbors
  /// outside the raster read as 0 and set *outside when they carry weight.
  double sample_local(const Point2& local_point, bool* outside = nullptr) const;
  /// Bilinear sample at continuous (col, row) coordinates.
  double sample_pixel(double col, double row, bool* outside = nullptr) const;
  double sample_map(const Point2& map_point, bool* outside = nullptr) const;
  /// Value of the pixel containing the map point, 0 outside the raster.
  double lookup_map(const Point2& map_point) const;

  /// Throws if any value leaves [0, 1] or is NaN.
  void validate() const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double meters_per_pixel_ = kOverheadMetersPerPixel;
  Pose2 origin_;
  std::vector<double> values_;
};

/// Lidar-derived supervision: binary target and binary certainty mask.
struct OccupancyLabels {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> label;
  std::vector<std::uint8_t> mask;

  OccupancyLabels() = default;
  OccupancyLabels(std::size_t w, std::size_t h) : width(w), height(h), label(w * h, 0), mask(w * h, 0) {}
  void validate() const;
};

/// Range-azimuth resampling of an occupancy image around its center.
struct PolarGrid {
  std::size_t azimuth_count = 0;
  std::size_t range_bins = 0;
  double range_resolution = 0.0;
  std::vector<double> values;  // row-major by azimuth
  bool clipped = false;        // requested range exceeded the image and was reduced

  double at(std::size_t azimuth, std::size_t bin) const { return values[azimuth * range_bins + bin]; }
  double azimuth_angle(std::size_t azimuth) const;
};

/// Polar samples at angle 2*pi*i/azimuth_count and range (j + 0.5) * meters_per_pixel.
PolarGrid to_polar(const OccupancyImage& occ, std::size_t azimuth_count, std::size_t range_bins);

/// First bin per azimuth whose value exceeds tau_occ, placed at its bin
/// center. Points are in the image frame centered on the image center.
PointCloud2D raytrace_points(const PolarGrid& polar, double tau_occ, double range_resolution);

/// -sum M [L log p + (1 - L) log(1 - p)], p clamped to [eps, 1 - eps].
double masked_bce(const OccupancyImage& pred, const OccupancyLabels& labels);
/// 1 - 2 sum(M p L) / (sum(M p) + sum(M L)); 0 when the denominator is 0.
double dice_loss(const OccupancyImage& pred, const OccupancyLabels& labels);
double combined_loss(const OccupancyImage& pred, const OccupancyLabels& labels,
                     double lambda = kDefaultDiceWeight);

struct FetchedPatch {
  OccupancyImage image;
  bool padded = false;  // some pixels fell outside the world raster and read as 0
};

/// Axis-aligned square crop of `world` centered at (center.x, center.y),
/// resampled bilinearly at the requested resolution. Heading is ignored.
FetchedPatch fetch_patch(const OccupancyImage& world, const Pose2& center,
                         std::size_t size_px = kDefaultPatchSize,
                         double meters_per_pixel = kOverheadMetersPerPixel);

}  // namespace radloc
