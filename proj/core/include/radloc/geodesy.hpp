#pragma once

#include "radloc/se2.hpp"

namespace radloc {

inline constexpr double kEarthRadius = 6371000.0;  // m, mean radius

struct GeoPoint {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

/// Map-frame origin: x east, y north. Heading is degrees clockwise from north.
struct GeoReference {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double heading_deg = 0.0;

  GeoPoint point() const { return {latitude_deg, longitude_deg}; }
  /// Throws std::invalid_argument for non-finite or out-of-range coordinates.
  void validate() const;
};

/// Equirectangular tangent-plane offset of `point` from `origin` in meters.
/// Accurate to well under a meter within a few tens of kilometers.
Point2 geo_to_local(const GeoPoint& origin, const GeoPoint& point);
GeoPoint local_to_geo(const GeoPoint& origin, const Point2& local);

/// theta = pi/2 - heading, wrapped; heading 0 (north) is map +y.
double heading_to_theta(double heading_deg);
double theta_to_heading(double theta);

/// Map-frame pose of the reference itself: (0, 0, heading_to_theta(heading)).
Pose2 origin_pose(const GeoReference& reference);

}  // namespace radloc
