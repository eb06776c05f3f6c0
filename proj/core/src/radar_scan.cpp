#include "radloc/radar_scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace radloc {

PolarScan::PolarScan(std::size_t azimuth_count, std::size_t range_bin_count, double range_resolution,
                     double timestamp)
    : azimuth_count_(azimuth_count),
      range_bin_count_(range_bin_count),
      range_resolution_(range_resolution),
      timestamp_(timestamp),
      data_(azimuth_count * range_bin_count, 0.0f) {
  if (azimuth_count == 0) throw std::invalid_argument("PolarScan: azimuth_count must be positive");
  if (!(range_resolution > 0.0)) throw std::invalid_argument("PolarScan: range_resolution must be positive");
}

double PolarScan::azimuth_angle(std::size_t azimuth) const {
  return 2.0 * std::numbers::pi * static_cast<double>(azimuth) / static_cast<double>(azimuth_count_);
}

std::span<const float> PolarScan::row(std::size_t azimuth) const {
  return std::span<const float>(data_).subspan(azimuth * range_bin_count_, range_bin_count_);
}

std::span<float> PolarScan::row(std::size_t azimuth) {
  return std::span<float>(data_).subspan(azimuth * range_bin_count_, range_bin_count_);
}

std::vector<std::size_t> k_strongest_bins(std::span<const float> row, std::size_t k) {
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 0.0f) candidates.push_back(j);
  }
  // Stronger first; equal intensity resolves toward the nearer bin.
  const auto stronger = [&row](std::size_t a, std::size_t b) {
    return row[a] > row[b] || (row[a] == row[b] && a < b);
  };
  if (candidates.size() > k) {
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                     candidates.end(), stronger);
    candidates.resize(k);
  }
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

PointCloud2D k_strongest(const PolarScan& scan, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k_strongest: k must be at least 1");
  PointCloud2D cloud;
  cloud.points.reserve(scan.azimuth_count() * k);
  cloud.intensities.reserve(scan.azimuth_count() * k);
  for (std::size_t i = 0; i < scan.azimuth_count(); ++i) {
    const auto row = scan.row(i);
    const double angle = scan.azimuth_angle(i);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (const std::size_t bin : k_strongest_bins(row, k)) {
      const double r = scan.bin_range(bin);
      cloud.points.emplace_back(r * c, r * s);
      cloud.intensities.push_back(row[bin]);
    }
  }
  return cloud;
}

}  // namespace radloc
