#include "radloc/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace radloc {

OccupancyImage::OccupancyImage(std::size_t width, std::size_t height, double meters_per_pixel, Pose2 origin,
                               double fill)
    : width_(width),
      height_(height),
      meters_per_pixel_(meters_per_pixel),
      origin_(origin),
      values_(width * height, fill) {
  if (!(meters_per_pixel > 0.0)) throw std::invalid_argument("OccupancyImage: meters_per_pixel must be positive");
}

Point2 OccupancyImage::pixel_center(std::size_t row, std::size_t col) const {
  const Point2 local{(static_cast<double>(col) + 0.5 - 0.5 * static_cast<double>(width_)) * meters_per_pixel_,
                     (0.5 * static_cast<double>(height_) - static_cast<double>(row) - 0.5) * meters_per_pixel_};
  return transform_point(origin_, local);
}

Point2 OccupancyImage::local_to_pixel(const Point2& local) const {
  return {local.x() / meters_per_pixel_ + 0.5 * static_cast<double>(width_) - 0.5,
          0.5 * static_cast<double>(height_) - local.y() / meters_per_pixel_ - 0.5};
}

Point2 OccupancyImage::map_to_pixel(const Point2& map_point) const {
  return local_to_pixel(transform_point(inverse(origin_), map_point));
}

double OccupancyImage::sample_local(const Point2& local, bool* outside) const {
  const Point2 uv = local_to_pixel(local);
  return sample_pixel(uv.x(), uv.y(), outside);
}

double OccupancyImage::sample_pixel(double col, double row, bool* outside) const {
  const double c0f = std::floor(col);
  const double r0f = std::floor(row);
  const double fu = col - c0f;
  const double fv = row - r0f;
  const double weights[4] = {(1.0 - fu) * (1.0 - fv), fu * (1.0 - fv), (1.0 - fu) * fv, fu * fv};
  const double dc[4] = {0.0, 1.0, 0.0, 1.0};
  const double dr[4] = {0.0, 0.0, 1.0, 1.0};
  double value = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (weights[n] == 0.0) continue;
    const double c = c0f + dc[n];
    const double r = r0f + dr[n];
    if (c < 0.0 || r < 0.0 || c >= static_cast<double>(width_) || r >= static_cast<double>(height_)) {
      if (outside) *outside = true;
      continue;
    }
    value += weights[n] * at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  }
  return value;
}

double OccupancyImage::sample_map(const Point2& map_point, bool* outside) const {
  return sample_local(transform_point(inverse(origin_), map_point), outside);
}

double OccupancyImage::lookup_map(const Point2& map_point) const {
  const Point2 uv = map_to_pixel(map_point);
  const double c = std::floor(uv.x() + 0.5);
  const double r = std::floor(uv.y() + 0.5);
  if (c < 0.0 || r < 0.0 || c >= static_cast<double>(width_) || r >= static_cast<double>(height_)) return 0.0;
  return at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
}

void OccupancyImage::validate() const {
  for (const double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("OccupancyImage: values must lie in [0, 1]");
  }
}

void OccupancyLabels::validate() const {
  if (label.size() != width * height || mask.size() != width * height) {
    throw std::invalid_argument("OccupancyLabels: grid sizes do not match dimensions");
  }
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] > 1 || mask[i] > 1) throw std::invalid_argument("OccupancyLabels: values must be 0 or 1");
  }
}

double PolarGrid::azimuth_angle(std::size_t azimuth) const {
  return 2.0 * std::numbers::pi * static_cast<double>(azimuth) / static_cast<double>(azimuth_count);
}

PolarGrid to_polar(const OccupancyImage& occ, std::size_t azimuth_count, std::size_t range_bins) {
  if (azimuth_count == 0) throw std::invalid_argument("to_polar: azimuth_count must be positive");
  PolarGrid polar;
  polar.azimuth_count = azimuth_count;
  polar.range_resolution = occ.meters_per_pixel();
  const std::size_t max_bins = std::min(occ.width(), occ.height()) / 2;
  polar.range_bins = range_bins;
  if (range_bins > max_bins) {
    polar.range_bins = max_bins;
    polar.clipped = true;
  }
  polar.values.assign(azimuth_count * polar.range_bins, 0.0);
  for (std::size_t i = 0; i < azimuth_count; ++i) {
    const double angle = polar.azimuth_angle(i);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (std::size_t j = 0; j < polar.range_bins; ++j) {
      const double r = (static_cast<double>(j) + 0.5) * polar.range_resolution;
      polar.values[i * polar.range_bins + j] = occ.sample_local({r * c, r * s});
    }
  }
  return polar;
}

PointCloud2D raytrace_points(const PolarGrid& polar, double tau_occ, double range_resolution) {
  if (!(tau_occ > 0.0 && tau_occ < 1.0)) throw std::invalid_argument("raytrace_points: tau_occ must be in (0, 1)");
  PointCloud2D cloud;
  for (std::size_t i = 0; i < polar.azimuth_count; ++i) {
    for (std::size_t j = 0; j < polar.range_bins; ++j) {
      const double v = polar.at(i, j);
      if (v > tau_occ) {
        const double angle = polar.azimuth_angle(i);
        const double r = (static_cast<double>(j) + 0.5) * range_resolution;
        cloud.points.emplace_back(r * std::cos(angle), r * std::sin(angle));
        cloud.intensities.push_back(v);
        break;
      }
    }
  }
  return cloud;
}

namespace {

void check_dimensions(const OccupancyImage& pred, const OccupancyLabels& labels) {
  if (pred.width() != labels.width || pred.height() != labels.height ||
      labels.label.size() != pred.values().size() || labels.mask.size() != pred.values().size()) {
    throw std::invalid_argument("loss: prediction and label dimensions differ");
  }
}

}  // namespace

double masked_bce(const OccupancyImage& pred, const OccupancyLabels& labels) {
  check_dimensions(pred, labels);
  const auto& p = pred.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!labels.mask[i]) continue;
    const double q = std::clamp(p[i], kLossEpsilon, 1.0 - kLossEpsilon);
    sum += labels.label[i] ? std::log(q) : std::log(1.0 - q);
  }
  return -sum;
}

double dice_loss(const OccupancyImage& pred, const OccupancyLabels& labels) {
  check_dimensions(pred, labels);
  const auto& p = pred.values();
  double intersection = 0.0;
  double pred_mass = 0.0;
  double label_mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!labels.mask[i]) continue;
    intersection += p[i] * labels.label[i];
    pred_mass += p[i];
    label_mass += labels.label[i];
  }
  const double denominator = pred_mass + label_mass;
  if (denominator == 0.0) return 0.0;
  return 1.0 - 2.0 * intersection / denominator;
}

double combined_loss(const OccupancyImage& pred, const OccupancyLabels& labels, double lambda) {
  return masked_bce(pred, labels) + lambda * dice_loss(pred, labels);
}

FetchedPatch fetch_patch(const OccupancyImage& world, const Pose2& center, std::size_t size_px,
                         double meters_per_pixel) {
  FetchedPatch patch;
  patch.image = OccupancyImage(size_px, size_px, meters_per_pixel, Pose2(center.x(), center.y(), 0.0));
  if (size_px == 0) return patch;
  // World pixel coordinates are affine in the patch (row, col).
  const Point2 base = world.map_to_pixel(patch.image.pixel_center(0, 0));
  const Point2 step_col = world.map_to_pixel(patch.image.pixel_center(0, 1 % size_px)) - base;
  const Point2 step_row = world.map_to_pixel(patch.image.pixel_center(1 % size_px, 0)) - base;
  for (std::size_t r = 0; r < size_px; ++r) {
    for (std::size_t c = 0; c < size_px; ++c) {
      const Point2 uv = base + static_cast<double>(c) * step_col + static_cast<double>(r) * step_row;
      patch.image.at(r, c) = world.sample_pixel(uv.x(), uv.y(), &patch.padded);
    }
  }
  return patch;
}

}  // namespace radloc
