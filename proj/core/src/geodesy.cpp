#include "radloc/geodesy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace radloc {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_point(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || std::abs(lat) > 90.0 || std::abs(lon) > 180.0) {
    throw std::invalid_argument("geodesy: latitude must lie in [-90, 90] and longitude in [-180, 180]");
  }
}

}  // namespace

void GeoReference::validate() const {
  check_point(latitude_deg, longitude_deg);
  if (!std::isfinite(heading_deg)) throw std::invalid_argument("geodesy: heading must be finite");
}

Point2 geo_to_local(const GeoPoint& origin, const GeoPoint& point) {
  check_point(origin.latitude_deg, origin.longitude_deg);
  check_point(point.latitude_deg, point.longitude_deg);
  double dlon = point.longitude_deg - origin.longitude_deg;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  const double dlat = point.latitude_deg - origin.latitude_deg;
  return {kEarthRadius * std::cos(origin.latitude_deg * kDegToRad) * dlon * kDegToRad,
          kEarthRadius * dlat * kDegToRad};
}

GeoPoint local_to_geo(const GeoPoint& origin, const Point2& local) {
  check_point(origin.latitude_deg, origin.longitude_deg);
  const double lat = origin.latitude_deg + local.y() / kEarthRadius / kDegToRad;
  const double lon =
      origin.longitude_deg + local.x() / (kEarthRadius * std::cos(origin.latitude_deg * kDegToRad)) / kDegToRad;
  return {lat, lon};
}

double heading_to_theta(double heading_deg) { return normalize_angle(std::numbers::pi / 2.0 - heading_deg * kDegToRad); }

double theta_to_heading(double theta) {
  double heading = (std::numbers::pi / 2.0 - theta) / kDegToRad;
  heading = std::fmod(heading, 360.0);
  return heading < 0.0 ? heading + 360.0 : heading;
}

Pose2 origin_pose(const GeoReference& reference) {
  reference.validate();
  return {0.0, 0.0, heading_to_theta(reference.heading_deg)};
}

}  // namespace radloc
