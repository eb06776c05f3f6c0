#pragma once

// Reference implementations written independently of core/: plain loops,
// full sorts and explicit matrices. They trade speed for obviousness.

#include <cstddef>
#include <functional>
#include <vector>

#include "radloc/occupancy.hpp"
#include "radloc/radar_scan.hpp"
#include "radloc/se2.hpp"

namespace radloc::testing {

/// Bins kept per azimuth: full sort by (intensity desc, bin asc), first k
/// strictly positive entries, returned ascending.
std::vector<std::size_t> brute_strongest_bins(const std::vector<float>& row, std::size_t k);
/// Whole-scan version producing bin-center points.
PointCloud2D brute_k_strongest(const PolarScan& scan, std::size_t k);

/// Lowest bin above tau per azimuth, found by walking every bin from the far end.
PointCloud2D brute_raytrace(const PolarGrid& grid, double tau, double range_resolution);

double oracle_bce(const OccupancyImage& pred, const OccupancyLabels& labels);
double oracle_dice(const OccupancyImage& pred, const OccupancyLabels& labels);

/// 3x3 homogeneous matrices built from cos/sin directly.
Matrix3 oracle_matrix(double x, double y, double theta);
/// exp through a scaled matrix power series.
Matrix3 series_exp(const Twist2& xi);

/// Central differences of f(T exp(d)) in the right-perturbation convention,
/// column j for d = h e_j.
Matrix3 numeric_jacobian(const std::function<Vector3(const Vector3&)>& f, double h = 1e-6);

}  // namespace radloc::testing
