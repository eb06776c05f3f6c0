#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "radloc/radar_scan.hpp"
#include "radloc/se2.hpp"

namespace radloc {

struct CoarsePhase {
  double trim_distance = 0.0;  // m
  std::size_t iterations = 0;
};

struct IcpConfig {
  double trim_distance = 4.0;  // m
  std::size_t max_iterations = 50;
  double translation_tolerance = 1e-4;  // m, per-iteration update
  double rotation_tolerance = 1e-5;     // rad, per-iteration update
  std::optional<CoarsePhase> coarse;

  void validate() const;
};

/// Per-iteration trace; `mse_before` and `mse_after` use the same pairs.
struct IcpIteration {
  double trim_distance = 0.0;
  std::size_t pair_count = 0;
  double mse_before = 0.0;
  double mse_after = 0.0;
  Pose2 update;
};

struct IcpResult {
  Pose2 transform;  // maps source points into the target frame
  double fitness = 0.0;
  std::size_t inlier_count = 0;
  std::size_t target_count = 0;
  std::size_t iterations_used = 0;
  bool converged = false;
  std::vector<IcpIteration> trace;
};

/// Trimmed point-to-point ICP. Each iteration pairs every transformed source
/// point with its nearest target point, drops pairs farther than the trim
/// distance and solves the closed-form rigid alignment of the rest. The
/// optional coarse phase runs first with its own trim. Fitness counts the
/// distinct target points that are some source point's nearest neighbor
/// within the fine trim at the final pose, divided by the target size.
///
/// Throws std::invalid_argument when either cloud has fewer than 3 points.
IcpResult icp(const PointCloud2D& source, const PointCloud2D& target, const Pose2& initial_guess,
              const IcpConfig& config);

/// Closed-form least-squares rigid transform taking `from[i]` onto `to[i]`.
Pose2 align_pairs(const std::vector<Point2>& from, const std::vector<Point2>& to);

/// Accepts iff the registration converged and fitness >= tau_fit.
bool fitness_gate(const IcpResult& result, double tau_fit);

}  // namespace radloc
