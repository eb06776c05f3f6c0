#include "radloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

namespace radloc {
namespace {

constexpr double kPi = std::numbers::pi;

OccupancyImage make_raster(double min_x, double min_y, double max_x, double max_y) {
  const auto w = static_cast<std::size_t>(std::ceil((max_x - min_x) / kWorldMetersPerPixel));
  const auto h = static_cast<std::size_t>(std::ceil((max_y - min_y) / kWorldMetersPerPixel));
  const Pose2 origin(min_x + 0.5 * static_cast<double>(w) * kWorldMetersPerPixel,
                     min_y + 0.5 * static_cast<double>(h) * kWorldMetersPerPixel, 0.0);
  return OccupancyImage(w, h, kWorldMetersPerPixel, origin);
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Street grid shared by the urban and suburban presets.
constexpr double kBlockPitchX = 75.0;
constexpr double kBlockPitchY = 50.0;
constexpr double kStreetHalfWidth = 9.0;

template <typename Fn>
void for_each_block(const Box& extent, Fn&& fn) {
  for (double cx = std::floor(extent.min_x / kBlockPitchX) * kBlockPitchX; cx < extent.max_x; cx += kBlockPitchX) {
    for (double cy = std::floor(extent.min_y / kBlockPitchY) * kBlockPitchY; cy < extent.max_y; cy += kBlockPitchY) {
      Box block{cx + kStreetHalfWidth, cy + kStreetHalfWidth, cx + kBlockPitchX - kStreetHalfWidth,
                cy + kBlockPitchY - kStreetHalfWidth};
      block.min_x = std::max(block.min_x, extent.min_x);
      block.min_y = std::max(block.min_y, extent.min_y);
      block.max_x = std::min(block.max_x, extent.max_x);
      block.max_y = std::min(block.max_y, extent.max_y);
      if (block.max_x - block.min_x > 4.0 && block.max_y - block.min_y > 4.0) fn(block);
    }
  }
}

// Poles along both curbs of every street segment inside the extent.
void add_poles(OccupancyImage& raster, const Box& extent, std::mt19937_64& rng, double mean_spacing) {
  const double offset = kStreetHalfWidth - 1.5;
  for (double cx = std::floor(extent.min_x / kBlockPitchX) * kBlockPitchX; cx < extent.max_x; cx += kBlockPitchX) {
    for (const double side : {-offset, offset}) {
      for (double y = extent.min_y + uniform(rng, 0.0, mean_spacing); y < extent.max_y;
           y += uniform(rng, 0.5 * mean_spacing, 1.5 * mean_spacing)) {
        fill_box(raster, {cx + side - 0.25, y - 0.25, cx + side + 0.25, y + 0.25});
      }
    }
  }
  for (double cy = std::floor(extent.min_y / kBlockPitchY) * kBlockPitchY; cy < extent.max_y; cy += kBlockPitchY) {
    for (const double side : {-offset, offset}) {
      for (double x = extent.min_x + uniform(rng, 0.0, mean_spacing); x < extent.max_x;
           x += uniform(rng, 0.5 * mean_spacing, 1.5 * mean_spacing)) {
        fill_box(raster, {x - 0.25, cy + side - 0.25, x + 0.25, cy + side + 0.25});
      }
    }
  }
}

WorldMap build_corridor(std::mt19937_64& rng) {
  WorldMap world{make_raster(-30.0, -20.0, 290.0, 20.0), "corridor", 0};
  fill_box(world.raster, {-20.0, -11.0, 280.0, -10.0});
  fill_box(world.raster, {-20.0, 10.0, 280.0, 11.0});
  fill_box(world.raster, {-21.0, -11.0, -20.0, 11.0});
  fill_box(world.raster, {280.0, -11.0, 281.0, 11.0});
  for (const double side : {-1.0, 1.0}) {
    for (double x = -15.0 + uniform(rng, 0.0, 5.0); x < 275.0; x += uniform(rng, 5.0, 10.0)) {
      const double width = uniform(rng, 0.8, 2.0);
      const double depth = uniform(rng, 1.5, 3.0);
      if (side < 0) {
        fill_box(world.raster, {x, -10.0, x + width, -10.0 + depth});
      } else {
        fill_box(world.raster, {x, 10.0 - depth, x + width, 10.0});
      }
    }
  }
  return world;
}

// Ribs (stoops, bays, columns) protruding from every face of `building` that
// lies within 4 m of the block boundary.
void add_facade_ribs(OccupancyImage& raster, const Box& building, const Box& block, std::mt19937_64& rng) {
  const auto ribs = [&](double from, double to, auto&& place) {
    for (double s = from + uniform(rng, 0.0, 4.0); s + 0.8 < to; s += uniform(rng, 5.0, 10.0)) {
      const double width = std::min(uniform(rng, 0.8, 2.0), to - s);
      place(s, s + width, uniform(rng, 1.5, 3.0));
    }
  };
  if (building.min_y - block.min_y < 4.0) {
    ribs(building.min_x, building.max_x,
         [&](double a, double b, double d) { fill_box(raster, {a, building.min_y - d, b, building.min_y}); });
  }
  if (block.max_y - building.max_y < 4.0) {
    ribs(building.min_x, building.max_x,
         [&](double a, double b, double d) { fill_box(raster, {a, building.max_y, b, building.max_y + d}); });
  }
  if (building.min_x - block.min_x < 4.0) {
    ribs(building.min_y, building.max_y,
         [&](double a, double b, double d) { fill_box(raster, {building.min_x - d, a, building.min_x, b}); });
  }
  if (block.max_x - building.max_x < 4.0) {
    ribs(building.min_y, building.max_y,
         [&](double a, double b, double d) { fill_box(raster, {building.max_x, a, building.max_x + d, b}); });
  }
}

WorldMap build_urban(std::mt19937_64& rng) {
  const Box extent{-110.0, -80.0, 260.0, 180.0};
  WorldMap world{make_raster(extent.min_x, extent.min_y, extent.max_x, extent.max_y), "urban", 0};
  // Two rows of lots per block; every building has its own setback so no
  // facade runs straight for more than one lot.
  for_each_block(extent, [&](const Box& block) {
    const double split = 0.5 * (block.min_y + block.max_y);
    for (const bool south : {true, false}) {
      double x = block.min_x;
      while (block.max_x - x > 5.0) {
        const double width = std::min(uniform(rng, 7.0, 16.0), block.max_x - x);
        const double lo_x = x + (x == block.min_x ? uniform(rng, 0.0, 3.0) : 0.0);
        const double hi_x = x + width == block.max_x ? block.max_x - uniform(rng, 0.0, 3.0) : x + width;
        const Box building = south ? Box{lo_x, block.min_y + uniform(rng, 0.0, 3.5), hi_x, split - uniform(rng, 1.0, 3.0)}
                                   : Box{lo_x, split + uniform(rng, 1.0, 3.0), hi_x, block.max_y - uniform(rng, 0.0, 3.5)};
        fill_box(world.raster, building);
        add_facade_ribs(world.raster, building, block, rng);
        x += width + uniform(rng, 3.0, 6.0);
      }
    }
  });
  add_poles(world.raster, extent, rng, 25.0);
  return world;
}

WorldMap build_suburban(std::mt19937_64& rng) {
  const Box extent{-110.0, -80.0, 260.0, 180.0};
  WorldMap world{make_raster(extent.min_x, extent.min_y, extent.max_x, extent.max_y), "suburban", 0};
  for_each_block(extent, [&](const Box& block) {
    const int houses = std::uniform_int_distribution<int>(2, 4)(rng);
    const double slot = (block.max_x - block.min_x) / houses;
    for (int i = 0; i < houses; ++i) {
      const double w = std::min(uniform(rng, 8.0, 14.0), slot - 2.0);
      const double h = std::min(uniform(rng, 8.0, 12.0), block.max_y - block.min_y - 6.0);
      if (w < 3.0 || h < 3.0) continue;
      const double x0 = block.min_x + i * slot + uniform(rng, 1.0, slot - w - 1.0 + 1e-9);
      const bool north = std::bernoulli_distribution(0.5)(rng);
      const double y0 = north ? block.max_y - 3.0 - h : block.min_y + 3.0;
      fill_box(world.raster, {x0, y0, x0 + w, y0 + h});
    }
    const int trees = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int i = 0; i < trees; ++i) {
      const double x = uniform(rng, block.min_x, block.max_x);
      const double y = uniform(rng, block.min_y, block.max_y);
      const double r = uniform(rng, 0.5, 1.2);
      fill_box(world.raster, {x - r, y - r, x + r, y + r});
    }
  });
  add_poles(world.raster, extent, rng, 40.0);
  return world;
}

WorldMap build_marine(std::mt19937_64& rng) {
  WorldMap world{make_raster(-60.0, -60.0, 560.0, 90.0), "marine", 0};
  // Shoreline: piecewise-constant 5 m steps around y = 40, band 25 m deep.
  for (double x = -60.0; x < 560.0; x += 5.0) {
    const double shore = 40.0 + 3.0 * std::sin(x / 37.0) + uniform(rng, -1.5, 1.5);
    fill_box(world.raster, {x, shore, x + 5.0, shore + 25.0});
  }
  for (double x = -40.0 + uniform(rng, 0.0, 40.0); x < 540.0; x += uniform(rng, 40.0, 80.0)) {
    const double length = uniform(rng, 10.0, 25.0);
    fill_box(world.raster, {x, 40.0 - length, x + 3.0, 42.0});
  }
  return world;
}

// Occupied pixels of one moving box at one instant, on a sub-window of the
// world raster.
struct OccluderWindow {
  long col0 = 0;
  long row0 = 0;
  long cols = 0;
  long rows = 0;
  std::vector<std::uint8_t> cells;

  bool occupied(long col, long row) const {
    const long c = col - col0;
    const long r = row - row0;
    return c >= 0 && r >= 0 && c < cols && r < rows && cells[static_cast<std::size_t>(r * cols + c)];
  }
};

struct OccluderOverlay {
  std::vector<OccluderWindow> windows;

  bool occupied(long col, long row) const {
    for (const auto& w : windows) {
      if (w.occupied(col, row)) return true;
    }
    return false;
  }
};

OccluderOverlay rasterize_occluders(const OccupancyImage& raster, const std::vector<Occluder>& occluders, double t) {
  OccluderOverlay overlay;
  for (const auto& o : occluders) {
    const Pose2 pose = o.pose_at(t);
    double min_c = 1e300, min_r = 1e300, max_c = -1e300, max_r = -1e300;
    for (const double sx : {-1.0, 1.0}) {
      for (const double sy : {-1.0, 1.0}) {
        const Point2 px = raster.map_to_pixel(pose * Point2(sx * o.half_extent.x(), sy * o.half_extent.y()));
        min_c = std::min(min_c, px.x());
        max_c = std::max(max_c, px.x());
        min_r = std::min(min_r, px.y());
        max_r = std::max(max_r, px.y());
      }
    }
    if (max_c < -1.0 || max_r < -1.0 || min_c > static_cast<double>(raster.width()) ||
        min_r > static_cast<double>(raster.height())) {
      continue;
    }
    OccluderWindow w;
    w.col0 = static_cast<long>(std::floor(min_c));
    w.row0 = static_cast<long>(std::floor(min_r));
    w.cols = static_cast<long>(std::ceil(max_c)) + 1 - w.col0;
    w.rows = static_cast<long>(std::ceil(max_r)) + 1 - w.row0;
    w.cells.assign(static_cast<std::size_t>(w.cols * w.rows), 0);
    const double mpp = raster.meters_per_pixel();
    const Pose2 box_from_map = compose(inverse(pose), raster.origin());
    for (long r = 0; r < w.rows; ++r) {
      for (long c = 0; c < w.cols; ++c) {
        // Pixel center in raster-local coordinates, then in the box frame.
        const Point2 local{(static_cast<double>(w.col0 + c) + 0.5 - 0.5 * static_cast<double>(raster.width())) * mpp,
                           (0.5 * static_cast<double>(raster.height()) - static_cast<double>(w.row0 + r) - 0.5) * mpp};
        const Point2 in_box = box_from_map * local;
        if (std::abs(in_box.x()) <= o.half_extent.x() && std::abs(in_box.y()) <= o.half_extent.y()) {
          w.cells[static_cast<std::size_t>(r * w.cols + c)] = 1;
        }
      }
    }
    overlay.windows.push_back(std::move(w));
  }
  return overlay;
}

// Separable Gaussian with a normalized kernel; outside the raster reads 0.
std::vector<double> gaussian_blur(const std::vector<double>& values, std::size_t w, std::size_t h, double sigma_px) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;
  std::vector<double> tmp(values.size(), 0.0);
  std::vector<double> out(values.size(), 0.0);
  const long W = static_cast<long>(w);
  const long H = static_cast<long>(h);
  for (long r = 0; r < H; ++r) {
    for (long c = 0; c < W; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const long cc = c + k;
        if (cc >= 0 && cc < W) acc += kernel[k + radius] * values[r * W + cc];
      }
      tmp[r * W + c] = acc;
    }
  }
  for (long r = 0; r < H; ++r) {
    for (long c = 0; c < W; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const long rr = r + k;
        if (rr >= 0 && rr < H) acc += kernel[k + radius] * tmp[rr * W + c];
      }
      out[r * W + c] = acc;
    }
  }
  return out;
}

struct PathPiece {
  Point2 start;
  double heading = 0.0;
  double length = 0.0;
  double curvature = 0.0;

  Pose2 at(double s) const {
    if (curvature == 0.0) return {start.x() + s * std::cos(heading), start.y() + s * std::sin(heading), heading};
    const double h = heading + curvature * s;
    return {start.x() + (std::sin(h) - std::sin(heading)) / curvature,
            start.y() - (std::cos(h) - std::cos(heading)) / curvature, h};
  }
};

std::vector<PathPiece> build_path(const TrajectorySpec& spec) {
  const auto& wp = spec.waypoints;
  std::vector<PathPiece> pieces;
  Point2 cursor = wp.front();
  for (std::size_t i = 1; i < wp.size(); ++i) {
    const Point2 d_in = (wp[i] - wp[i - 1]).normalized();
    Point2 line_end = wp[i];
    std::optional<PathPiece> arc;
    if (i + 1 < wp.size() && spec.turn_radius > 0.0) {
      const Point2 d_out = (wp[i + 1] - wp[i]).normalized();
      const double turn = std::atan2(d_in.x() * d_out.y() - d_in.y() * d_out.x(), d_in.dot(d_out));
      if (std::abs(turn) > 1e-9 && std::abs(turn) < kPi - 1e-6) {
        const double half_limit =
            0.5 * std::min((wp[i] - wp[i - 1]).norm(), (wp[i + 1] - wp[i]).norm());
        const double tan_half = std::tan(0.5 * std::abs(turn));
        const double tangent = std::min(spec.turn_radius * tan_half, half_limit);
        const double radius = tangent / tan_half;
        line_end = wp[i] - tangent * d_in;
        arc = PathPiece{line_end, std::atan2(d_in.y(), d_in.x()), radius * std::abs(turn),
                        (turn > 0 ? 1.0 : -1.0) / radius};
      }
    }
    const double length = (line_end - cursor).norm();
    if (length > 1e-12) pieces.push_back({cursor, std::atan2(d_in.y(), d_in.x()), length, 0.0});
    if (arc) {
      pieces.push_back(*arc);
      cursor = arc->at(arc->length).translation();
    } else {
      cursor = line_end;
    }
  }
  return pieces;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void fill_box(OccupancyImage& raster, const Box& box, double value) {
  double min_c = 1e300, min_r = 1e300, max_c = -1e300, max_r = -1e300;
  for (const double x : {box.min_x, box.max_x}) {
    for (const double y : {box.min_y, box.max_y}) {
      const Point2 px = raster.map_to_pixel({x, y});
      min_c = std::min(min_c, px.x());
      max_c = std::max(max_c, px.x());
      min_r = std::min(min_r, px.y());
      max_r = std::max(max_r, px.y());
    }
  }
  const long c0 = std::max(0L, static_cast<long>(std::floor(min_c)));
  const long r0 = std::max(0L, static_cast<long>(std::floor(min_r)));
  const long c1 = std::min(static_cast<long>(raster.width()) - 1, static_cast<long>(std::ceil(max_c)));
  const long r1 = std::min(static_cast<long>(raster.height()) - 1, static_cast<long>(std::ceil(max_r)));
  for (long r = r0; r <= r1; ++r) {
    for (long c = c0; c <= c1; ++c) {
      if (box.contains(raster.pixel_center(static_cast<std::size_t>(r), static_cast<std::size_t>(c)))) {
        raster.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = value;
      }
    }
  }
}

const std::vector<std::string>& world_presets() {
  static const std::vector<std::string> presets{"empty", "corridor", "urban", "suburban", "marine"};
  return presets;
}

WorldMap build_world(const std::string& preset, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x5701D));
  WorldMap world;
  if (preset == "empty") {
    world = WorldMap{make_raster(-100.0, -100.0, 100.0, 100.0), preset, 0};
  } else if (preset == "corridor") {
    world = build_corridor(rng);
  } else if (preset == "urban") {
    world = build_urban(rng);
  } else if (preset == "suburban") {
    world = build_suburban(rng);
  } else if (preset == "marine") {
    world = build_marine(rng);
  } else {
    throw std::invalid_argument("unknown world preset: " + preset);
  }
  world.seed = seed;
  return world;
}

Pose2 Occluder::pose_at(double t) const {
  return {start.x() + velocity.x() * t, start.y() + velocity.y() * t, start.theta()};
}

std::size_t RadarSimConfig::range_bin_count() const {
  return static_cast<std::size_t>(std::floor(max_range / range_resolution + 1e-9));
}

void RadarSimConfig::validate() const {
  if (azimuth_count == 0) throw std::invalid_argument("RadarSimConfig: azimuth_count must be positive");
  if (!(range_resolution > 0.0) || !(max_range >= range_resolution)) {
    throw std::invalid_argument("RadarSimConfig: need 0 < range_resolution <= max_range");
  }
  if (noise_floor_sigma < 0.0 || clutter_rate < 0.0 || leakage < 0.0 || return_intensity <= 0.0) {
    throw std::invalid_argument("RadarSimConfig: negative noise, clutter or leakage");
  }
  if (dropout_prob < 0.0 || dropout_prob > 1.0) throw std::invalid_argument("RadarSimConfig: dropout_prob not in [0, 1]");
}

PolarScan simulate_scan(const WorldMap& world, const Pose2& pose, const RadarSimConfig& config, std::uint64_t seed,
                        double timestamp) {
  config.validate();
  const std::size_t bins = config.range_bin_count();
  PolarScan scan(config.azimuth_count, bins, config.range_resolution, timestamp);
  const OccupancyImage& raster = world.raster;
  const OccluderOverlay overlay = rasterize_occluders(raster, config.occluders, timestamp);
  const long W = static_cast<long>(raster.width());
  const long H = static_cast<long>(raster.height());
  const Point2 base = raster.map_to_pixel(pose.translation());

  for (std::size_t a = 0; a < config.azimuth_count; ++a) {
    const double angle = pose.theta() + scan.azimuth_angle(a);
    const Point2 tip{pose.x() + config.range_resolution * std::cos(angle),
                     pose.y() + config.range_resolution * std::sin(angle)};
    const Point2 step = raster.map_to_pixel(tip) - base;
    for (std::size_t s = 1; s <= bins; ++s) {
      const double sd = static_cast<double>(s);
      const long c = static_cast<long>(std::floor(base.x() + sd * step.x() + 0.5));
      const long r = static_cast<long>(std::floor(base.y() + sd * step.y() + 0.5));
      const bool inside = c >= 0 && r >= 0 && c < W && r < H;
      const bool hit = (inside && raster.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) > 0.5) ||
                       overlay.occupied(c, r);
      if (!hit) continue;
      const std::size_t bin = s - 1;
      scan.at(a, bin) = static_cast<float>(config.return_intensity);
      const auto leak = static_cast<float>(config.leakage * config.return_intensity);
      if (bin > 0) scan.at(a, bin - 1) = std::max(scan.at(a, bin - 1), leak);
      if (bin + 1 < bins) scan.at(a, bin + 1) = std::max(scan.at(a, bin + 1), leak);
      break;
    }
  }

  std::mt19937_64 rng(seed);
  if (config.noise_floor_sigma > 0.0) {
    std::normal_distribution<float> noise(0.0f, static_cast<float>(config.noise_floor_sigma));
    for (float& v : scan.data()) v = std::max(0.0f, v + noise(rng));
  }
  if (config.clutter_rate > 0.0) {
    const int count = std::poisson_distribution<int>(config.clutter_rate)(rng);
    std::uniform_int_distribution<std::size_t> az(0, config.azimuth_count - 1);
    std::uniform_int_distribution<std::size_t> bin(0, bins - 1);
    std::uniform_real_distribution<float> intensity(0.4f, 0.9f);
    for (int i = 0; i < count; ++i) {
      const std::size_t a = az(rng);
      const std::size_t b = bin(rng);
      scan.at(a, b) = std::max(scan.at(a, b), intensity(rng));
    }
  }
  if (config.dropout_prob > 0.0) {
    std::bernoulli_distribution drop(config.dropout_prob);
    for (std::size_t a = 0; a < config.azimuth_count; ++a) {
      if (drop(rng)) std::fill(scan.row(a).begin(), scan.row(a).end(), 0.0f);
    }
  }
  return scan;
}

void OverheadDegradation::validate() const {
  if (output_meters_per_pixel < 0.0 || blur_sigma < 0.0 || random_dropout_size < 0.0) {
    throw std::invalid_argument("OverheadDegradation: negative resolution, blur or dropout size");
  }
}

OccupancyImage degrade_overhead(const WorldMap& world, const OverheadDegradation& params, std::uint64_t seed) {
  params.validate();
  const OccupancyImage& src = world.raster;
  std::vector<double> values = src.values();
  if (params.blur_sigma > 0.0) {
    values = gaussian_blur(values, src.width(), src.height(), params.blur_sigma / src.meters_per_pixel());
  }
  OccupancyImage blurred(src.width(), src.height(), src.meters_per_pixel(), src.origin());
  blurred.values() = std::move(values);

  OccupancyImage out;
  const double out_mpp = params.output_meters_per_pixel > 0.0 ? params.output_meters_per_pixel : src.meters_per_pixel();
  const double ratio = out_mpp / src.meters_per_pixel();
  const double n_round = std::round(ratio);
  if (std::abs(ratio - n_round) < 1e-9 && n_round >= 1.0) {
    if (src.origin().theta() != 0.0) throw std::invalid_argument("degrade_overhead: block mean needs an unrotated raster");
    const auto n = static_cast<std::size_t>(n_round);
    out = OccupancyImage(src.width() / n, src.height() / n, out_mpp);
    // Keep the cropped block grid centered on the same map point.
    const Point2 first = blurred.pixel_center(0, 0);
    const Point2 out_first = first + Point2(0.5 * (n_round - 1.0), -0.5 * (n_round - 1.0)) * src.meters_per_pixel();
    const Point2 shift = out_first - Point2((0.5 - 0.5 * static_cast<double>(out.width())) * out_mpp,
                                            (0.5 * static_cast<double>(out.height()) - 0.5) * out_mpp);
    out.set_origin(Pose2(shift.x(), shift.y(), 0.0));
    const double inv = 1.0 / static_cast<double>(n * n);
    for (std::size_t r = 0; r < out.height(); ++r) {
      for (std::size_t c = 0; c < out.width(); ++c) {
        double acc = 0.0;
        for (std::size_t dr = 0; dr < n; ++dr) {
          for (std::size_t dc = 0; dc < n; ++dc) acc += blurred.at(r * n + dr, c * n + dc);
        }
        out.at(r, c) = acc * inv;
      }
    }
  } else {
    const auto w = static_cast<std::size_t>(std::floor(static_cast<double>(src.width()) / ratio));
    const auto h = static_cast<std::size_t>(std::floor(static_cast<double>(src.height()) / ratio));
    out = OccupancyImage(w, h, out_mpp, src.origin());
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) out.at(r, c) = blurred.sample_map(out.pixel_center(r, c));
    }
  }

  std::vector<Box> regions = params.dropout_regions;
  if (params.random_dropouts > 0) {
    std::mt19937_64 rng(derive_seed(seed, 0xD20F));
    const Point2 lo = out.pixel_center(out.height() - 1, 0);
    const Point2 hi = out.pixel_center(0, out.width() - 1);
    const double half = 0.5 * params.random_dropout_size;
    for (std::size_t i = 0; i < params.random_dropouts; ++i) {
      const double x = uniform(rng, lo.x(), hi.x());
      const double y = uniform(rng, lo.y(), hi.y());
      regions.push_back({x - half, y - half, x + half, y + half});
    }
  }
  for (const auto& box : regions) fill_box(out, box, 0.0);
  for (double& v : out.values()) v = std::clamp(v + params.occupancy_bias, 0.0, 1.0);
  return out;
}

void TrajectorySpec::validate() const {
  if (waypoints.size() < 2) throw std::invalid_argument("TrajectorySpec: need at least two waypoints");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if ((waypoints[i] - waypoints[i - 1]).norm() == 0.0) {
      throw std::invalid_argument("TrajectorySpec: consecutive waypoints must differ");
    }
  }
  if (!(speed > 0.0) || !(scan_rate > 0.0) || turn_radius < 0.0) {
    throw std::invalid_argument("TrajectorySpec: speed and scan_rate must be positive, turn_radius non-negative");
  }
}

double path_length(const TrajectorySpec& spec) {
  spec.validate();
  double total = 0.0;
  for (const auto& piece : build_path(spec)) total += piece.length;
  return total;
}

std::vector<TimedPose> generate_trajectory(const TrajectorySpec& spec) {
  spec.validate();
  const std::vector<PathPiece> pieces = build_path(spec);
  std::vector<double> starts;
  double total = 0.0;
  for (const auto& piece : pieces) {
    starts.push_back(total);
    total += piece.length;
  }
  const double spacing = spec.speed / spec.scan_rate;
  const auto count = static_cast<std::size_t>(std::floor(total / spacing + 1e-9)) + 1;
  std::vector<TimedPose> out;
  out.reserve(count);
  std::size_t k = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = std::min(static_cast<double>(i) * spacing, total);
    while (k + 1 < pieces.size() && starts[k + 1] <= s + 1e-12) ++k;
    out.push_back({spec.start_time + static_cast<double>(i) / spec.scan_rate,
                   pieces[k].at(std::min(s - starts[k], pieces[k].length))});
  }
  return out;
}

OccupancyLabels simulate_labels(const WorldMap& world, const OccupancyImage& grid, const std::vector<TimedPose>& poses,
                                const LabelOptions& options) {
  OccupancyLabels labels(grid.width(), grid.height());
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      labels.label[r * grid.width() + c] = world.raster.lookup_map(grid.pixel_center(r, c)) > 0.5 ? 1 : 0;
    }
  }
  const double step = 0.5 * grid.meters_per_pixel();
  const auto steps = static_cast<std::size_t>(options.max_range / step);
  const long W = static_cast<long>(grid.width());
  const long H = static_cast<long>(grid.height());
  const std::size_t stride = std::max<std::size_t>(1, options.pose_stride);
  for (std::size_t p = 0; p < poses.size(); p += stride) {
    const Pose2& pose = poses[p].pose;
    for (std::size_t a = 0; a < options.azimuth_count; ++a) {
      const double angle = 2.0 * kPi * static_cast<double>(a) / static_cast<double>(options.azimuth_count);
      const Point2 dir{std::cos(angle), std::sin(angle)};
      for (std::size_t s = 0; s <= steps; ++s) {
        const Point2 q = pose.translation() + static_cast<double>(s) * step * dir;
        const Point2 px = grid.map_to_pixel(q);
        const long c = static_cast<long>(std::floor(px.x() + 0.5));
        const long r = static_cast<long>(std::floor(px.y() + 0.5));
        if (c < 0 || r < 0 || c >= W || r >= H) break;
        labels.mask[static_cast<std::size_t>(r * W + c)] = 1;
        if (world.raster.lookup_map(q) > 0.5) break;
      }
    }
  }
  return labels;
}

Scenario default_scenario(const std::string& preset, std::uint64_t seed) {
  Scenario sc;
  sc.preset = preset;
  sc.seed = seed;
  sc.overhead.output_meters_per_pixel = kOverheadMetersPerPixel;
  if (preset == "corridor") {
    sc.trajectory.waypoints = {{0.0, 0.0}, {240.0, 0.0}};
    sc.trajectory.speed = 5.0;
  } else if (preset == "urban" || preset == "suburban") {
    sc.trajectory.waypoints = {{0.0, 0.0}, {150.0, 0.0}, {150.0, 100.0}, {0.0, 100.0}, {0.0, 0.0}, {40.0, 0.0}};
    sc.trajectory.speed = 8.0;
    sc.trajectory.turn_radius = 15.0;
    sc.radar.noise_floor_sigma = 0.0;
    sc.radar.clutter_rate = 20.0;
    sc.radar.dropout_prob = 0.01;
    sc.radar.occluders = {
        {Pose2(-60.0, 52.5, 0.0), {2.25, 0.9}, {6.0, 0.0}},
        {Pose2(77.5, -40.0, kPi / 2.0), {2.25, 0.9}, {0.0, 5.0}},
        {Pose2(200.0, 102.5, kPi), {6.0, 1.25}, {-4.0, 0.0}},
    };
    sc.overhead.blur_sigma = 0.3;
  } else if (preset == "marine") {
    sc.trajectory.waypoints = {{0.0, 0.0}, {500.0, 0.0}};
    sc.trajectory.speed = 6.0;
    sc.radar.noise_floor_sigma = 0.02;
    sc.radar.clutter_rate = 20.0;
    sc.overhead.blur_sigma = 0.3;
  } else if (preset == "empty") {
    sc.trajectory.waypoints = {{0.0, 0.0}, {50.0, 0.0}};
  } else {
    throw std::invalid_argument("unknown world preset: " + preset);
  }
  return sc;
}

}  // namespace radloc
