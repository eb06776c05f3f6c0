#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "radloc/se2.hpp"

namespace radloc {

inline constexpr std::size_t kDefaultAzimuthCount = 400;
inline constexpr double kDefaultRangeResolution = 0.043;  // m per bin

/// Polar radar image. Azimuth i points at angle 2*pi*i/azimuth_count,
/// counterclockwise from the sensor +x axis. Intensities are row-major,
/// one row per azimuth.
class PolarScan {
 public:
  PolarScan() = default;
  PolarScan(std::size_t azimuth_count, std::size_t range_bin_count, double range_resolution,
            double timestamp = 0.0);

  std::size_t azimuth_count() const { return azimuth_count_; }
  std::size_t range_bin_count() const { return range_bin_count_; }
  double range_resolution() const { return range_resolution_; }
  double timestamp() const { return timestamp_; }
  void set_timestamp(double t) { timestamp_ = t; }

  double azimuth_angle(std::size_t azimuth) const;
  /// Range of the center of a bin.
  double bin_range(std::size_t bin) const { return (static_cast<double>(bin) + 0.5) * range_resolution_; }

  float at(std::size_t azimuth, std::size_t bin) const { return data_[azimuth * range_bin_count_ + bin]; }
  float& at(std::size_t azimuth, std::size_t bin) { return data_[azimuth * range_bin_count_ + bin]; }

  std::span<const float> row(std::size_t azimuth) const;
  std::span<float> row(std::size_t azimuth);

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

 private:
  std::size_t azimuth_count_ = 0;
  std::size_t range_bin_count_ = 0;
  double range_resolution_ = kDefaultRangeResolution;
  double timestamp_ = 0.0;
  std::vector<float> data_;
};

/// Planar points in the sensor frame. `intensities` is either empty or has
/// one entry per point.
struct PointCloud2D {
  std::vector<Point2> points;
  std::vector<double> intensities;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Keeps, per azimuth, the k highest-intensity bins with strictly positive
/// intensity. Ties go to the nearer bin. Points sit at bin-center range and
/// are ordered by azimuth, then by range.
PointCloud2D k_strongest(const PolarScan& scan, std::size_t k);

/// Bins selected by k_strongest for a single azimuth row, ascending.
std::vector<std::size_t> k_strongest_bins(std::span<const float> row, std::size_t k);

}  // namespace radloc
