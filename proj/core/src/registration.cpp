#include "radloc/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace radloc {
namespace {

// Uniform grid over the target cloud. With cell >= trim, every neighbor
// within trim lies in the 3x3 block around the query cell.
class TargetGrid {
 public:
  TargetGrid(const std::vector<Point2>& points, double trim) : points_(points) {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (const auto& p : points) {
      min_x = std::min(min_x, p.x());
      min_y = std::min(min_y, p.y());
      max_x = std::max(max_x, p.x());
      max_y = std::max(max_y, p.y());
    }
    cell_ = trim;
    // Keep the table bounded for clouds with far-flung points.
    constexpr double kMaxCells = 4.0e6;
    while (((max_x - min_x) / cell_ + 1.0) * ((max_y - min_y) / cell_ + 1.0) > kMaxCells) cell_ *= 2.0;
    min_x_ = min_x;
    min_y_ = min_y;
    nx_ = static_cast<long>(std::floor((max_x - min_x) / cell_)) + 1;
    ny_ = static_cast<long>(std::floor((max_y - min_y) / cell_)) + 1;

    std::vector<std::size_t> cell_of(points.size());
    offsets_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const long cx = std::min(nx_ - 1, static_cast<long>((points[i].x() - min_x_) / cell_));
      const long cy = std::min(ny_ - 1, static_cast<long>((points[i].y() - min_y_) / cell_));
      cell_of[i] = static_cast<std::size_t>(cy * nx_ + cx);
      ++offsets_[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < offsets_.size(); ++c) offsets_[c] += offsets_[c - 1];
    indices_.resize(points.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) indices_[fill[cell_of[i]]++] = i;
  }

  /// Nearest target index within max_distance, ties to the lower index.
  std::optional<std::size_t> nearest(const Point2& q, double max_distance, double* distance_sq) const {
    const double fx = std::floor((q.x() - min_x_) / cell_);
    const double fy = std::floor((q.y() - min_y_) / cell_);
    if (fx < -1.0 || fy < -1.0 || fx > static_cast<double>(nx_) || fy > static_cast<double>(ny_)) return std::nullopt;
    const long cx = static_cast<long>(fx);
    const long cy = static_cast<long>(fy);
    const double limit = max_distance * max_distance;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    bool found = false;
    for (long y = std::max(0L, cy - 1); y <= std::min(ny_ - 1, cy + 1); ++y) {
      for (long x = std::max(0L, cx - 1); x <= std::min(nx_ - 1, cx + 1); ++x) {
        const std::size_t cell = static_cast<std::size_t>(y * nx_ + x);
        for (std::size_t k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
          const std::size_t idx = indices_[k];
          const double d2 = (points_[idx] - q).squaredNorm();
          if (d2 > limit) continue;
          if (d2 < best || (d2 == best && idx < best_index)) {
            best = d2;
            best_index = idx;
            found = true;
          }
        }
      }
    }
    if (!found) return std::nullopt;
    if (distance_sq) *distance_sq = best;
    return best_index;
  }

 private:
  const std::vector<Point2>& points_;
  double cell_ = 1.0;
  double min_x_ = 0.0;
  double min_y_ = 0.0;
  long nx_ = 1;
  long ny_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
};

struct Correspondences {
  std::vector<Point2> from;  // transformed source points
  std::vector<Point2> to;
  std::vector<std::size_t> target_index;
};

Correspondences correspond(const std::vector<Point2>& source, const Pose2& pose, const TargetGrid& grid,
                           const std::vector<Point2>& target, double trim) {
  Correspondences pairs;
  pairs.from.reserve(source.size());
  pairs.to.reserve(source.size());
  pairs.target_index.reserve(source.size());
  const double c = std::cos(pose.theta());
  const double s = std::sin(pose.theta());
  for (const auto& p : source) {
    const Point2 q{pose.x() + c * p.x() - s * p.y(), pose.y() + s * p.x() + c * p.y()};
    if (const auto idx = grid.nearest(q, trim, nullptr)) {
      pairs.from.push_back(q);
      pairs.to.push_back(target[*idx]);
      pairs.target_index.push_back(*idx);
    }
  }
  return pairs;
}

double mean_squared_distance(const std::vector<Point2>& from, const std::vector<Point2>& to, const Pose2& update) {
  const double c = std::cos(update.theta());
  const double s = std::sin(update.theta());
  double sum = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Point2 moved{update.x() + c * from[i].x() - s * from[i].y(), update.y() + s * from[i].x() + c * from[i].y()};
    sum += (moved - to[i]).squaredNorm();
  }
  return from.empty() ? 0.0 : sum / static_cast<double>(from.size());
}

// Runs up to `iterations` trimmed ICP steps at one trim distance.
// Returns false when an iteration had fewer than 2 pairs.
bool run_phase(const std::vector<Point2>& source, const std::vector<Point2>& target, double trim,
               std::size_t iterations, const IcpConfig& config, Pose2& pose, IcpResult& result, bool& converged) {
  const TargetGrid grid(target, trim);
  converged = false;
  for (std::size_t it = 0; it < iterations; ++it) {
    const Correspondences pairs = correspond(source, pose, grid, target, trim);
    if (pairs.from.size() < 2) return false;
    const Pose2 update = align_pairs(pairs.from, pairs.to);
    result.trace.push_back({trim, pairs.from.size(), mean_squared_distance(pairs.from, pairs.to, Pose2::identity()),
                            mean_squared_distance(pairs.from, pairs.to, update), update});
    pose = compose(update, pose);
    ++result.iterations_used;
    if (std::hypot(update.x(), update.y()) < config.translation_tolerance &&
        std::abs(update.theta()) < config.rotation_tolerance) {
      converged = true;
      break;
    }
  }
  return true;
}

void score(const std::vector<Point2>& source, const std::vector<Point2>& target, double trim, IcpResult& result) {
  const TargetGrid grid(target, trim);
  const Correspondences pairs = correspond(source, result.transform, grid, target, trim);
  std::vector<char> matched(target.size(), 0);
  for (const auto idx : pairs.target_index) matched[idx] = 1;
  result.inlier_count = static_cast<std::size_t>(std::count(matched.begin(), matched.end(), 1));
  result.target_count = target.size();
  result.fitness = target.empty() ? 0.0 : static_cast<double>(result.inlier_count) / static_cast<double>(target.size());
}

}  // namespace

void IcpConfig::validate() const {
  if (!(trim_distance > 0.0)) throw std::invalid_argument("IcpConfig: trim_distance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("IcpConfig: max_iterations must be at least 1");
  if (coarse && !(coarse->trim_distance > 0.0)) throw std::invalid_argument("IcpConfig: coarse trim must be positive");
}

Pose2 align_pairs(const std::vector<Point2>& from, const std::vector<Point2>& to) {
  const double n = static_cast<double>(from.size());
  Point2 from_mean = Point2::Zero();
  Point2 to_mean = Point2::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    from_mean += from[i];
    to_mean += to[i];
  }
  from_mean /= n;
  to_mean /= n;
  double dot = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Point2 a = from[i] - from_mean;
    const Point2 b = to[i] - to_mean;
    dot += a.x() * b.x() + a.y() * b.y();
    cross += a.x() * b.y() - a.y() * b.x();
  }
  const double theta = std::atan2(cross, dot);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {to_mean.x() - (c * from_mean.x() - s * from_mean.y()), to_mean.y() - (s * from_mean.x() + c * from_mean.y()),
          theta};
}

IcpResult icp(const PointCloud2D& source, const PointCloud2D& target, const Pose2& initial_guess,
              const IcpConfig& config) {
  config.validate();
  if (source.size() < 3 || target.size() < 3) {
    throw std::invalid_argument("icp: source and target need at least 3 points each");
  }
  IcpResult result;
  Pose2 pose = initial_guess;
  bool converged = false;
  bool enough_pairs = true;
  if (config.coarse && config.coarse->iterations > 0) {
    enough_pairs = run_phase(source.points, target.points, config.coarse->trim_distance, config.coarse->iterations,
                             config, pose, result, converged);
  }
  if (enough_pairs) {
    enough_pairs = run_phase(source.points, target.points, config.trim_distance, config.max_iterations, config, pose,
                             result, converged);
  }
  result.transform = pose;
  result.converged = enough_pairs && converged;
  score(source.points, target.points, config.trim_distance, result);
  return result;
}

bool fitness_gate(const IcpResult& result, double tau_fit) { return result.converged && result.fitness >= tau_fit; }

}  // namespace radloc
