#include "radloc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "radloc/evaluation.hpp"
#include "radloc/raster_io.hpp"
#include "radloc/scan_io.hpp"

namespace radloc {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::string to_text(T v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_double(v);
  } else {
    return std::to_string(v);
  }
}

template <typename T>
T from_text(const std::string& key, const std::string& text) {
  const auto fail = [&]() -> T { throw std::invalid_argument("config: bad value for '" + key + "': '" + text + "'"); };
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    return fail();
  } else {
    std::size_t used = 0;
    T value{};
    try {
      if constexpr (std::is_floating_point_v<T>) {
        value = std::stod(text, &used);
      } else if constexpr (std::is_signed_v<T>) {
        value = static_cast<T>(std::stol(text, &used));
      } else {
        if (!text.empty() && text[0] == '-') return fail();
        value = static_cast<T>(std::stoull(text, &used));
      }
    } catch (const std::exception&) {
      return fail();
    }
    if (used != text.size()) return fail();
    return value;
  }
}

struct Field {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T>
Field field(const char* key, T PipelineConfig::*member) {
  return {key, [member](const PipelineConfig& c) { return to_text(c.*member); },
          [key, member](PipelineConfig& c, const std::string& v) { c.*member = from_text<T>(key, v); }};
}

Field origin_field(const char* key, double GeoReference::*member) {
  return {key, [member](const PipelineConfig& c) { return to_text(c.origin.*member); },
          [key, member](PipelineConfig& c, const std::string& v) { c.origin.*member = from_text<double>(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      field("sigma_odom_xy", &PipelineConfig::sigma_odom_xy),
      field("sigma_odom_yaw_deg", &PipelineConfig::sigma_odom_yaw_deg),
      field("sigma_sat_xy", &PipelineConfig::sigma_sat_xy),
      field("sigma_sat_yaw_deg", &PipelineConfig::sigma_sat_yaw_deg),
      field("delta_sat", &PipelineConfig::delta_sat),
      field("delta_radar", &PipelineConfig::delta_radar),
      field("tau_fit", &PipelineConfig::tau_fit),
      field("k_radar", &PipelineConfig::k_radar),
      field("k_sat", &PipelineConfig::k_sat),
      field("tau_occ", &PipelineConfig::tau_occ),
      field("window_duration", &PipelineConfig::window_duration),
      field("patch_size", &PipelineConfig::patch_size),
      field("meters_per_pixel", &PipelineConfig::meters_per_pixel),
      field("coarse_trim_px", &PipelineConfig::coarse_trim_px),
      field("coarse_iterations", &PipelineConfig::coarse_iterations),
      field("icp_max_iterations", &PipelineConfig::icp_max_iterations),
      field("icp_tol_translation", &PipelineConfig::icp_tol_translation),
      field("icp_tol_rotation", &PipelineConfig::icp_tol_rotation),
      field("polar_azimuths", &PipelineConfig::polar_azimuths),
      field("polar_range_bins", &PipelineConfig::polar_range_bins),
      field("prior_sigma_xy", &PipelineConfig::prior_sigma_xy),
      field("prior_sigma_yaw_rad", &PipelineConfig::prior_sigma_yaw_rad),
      origin_field("origin_lat", &GeoReference::latitude_deg),
      origin_field("origin_lon", &GeoReference::longitude_deg),
      origin_field("origin_heading_deg", &GeoReference::heading_deg),
      field("inject_odom_sigma_xy", &PipelineConfig::inject_odom_sigma_xy),
      field("inject_odom_sigma_yaw_deg", &PipelineConfig::inject_odom_sigma_yaw_deg),
      field("inject_sat_sigma_xy", &PipelineConfig::inject_sat_sigma_xy),
      field("inject_sat_sigma_yaw_deg", &PipelineConfig::inject_sat_sigma_yaw_deg),
      field("unary_blackout_begin", &PipelineConfig::unary_blackout_begin),
      field("unary_blackout_end", &PipelineConfig::unary_blackout_end),
      field("disable_unary", &PipelineConfig::disable_unary),
      field("seed", &PipelineConfig::seed),
  };
  return table;
}

Pose2 perturb(const Pose2& p, double sigma_xy, double sigma_yaw, std::mt19937_64& rng) {
  if (sigma_xy <= 0.0 && sigma_yaw <= 0.0) return p;
  std::normal_distribution<double> n01(0.0, 1.0);
  const double dx = sigma_xy * n01(rng);
  const double dy = sigma_xy * n01(rng);
  const double dt = sigma_yaw * n01(rng);
  return {p.x() + dx, p.y() + dy, p.theta() + dt};
}

}  // namespace

void PipelineConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  require(sigma_odom_xy > 0.0 && sigma_odom_yaw_deg > 0.0 && sigma_sat_xy > 0.0 && sigma_sat_yaw_deg > 0.0,
          "noise sigmas must be positive");
  require(delta_sat > 0.0 && delta_radar > 0.0, "trim distances must be positive");
  require(tau_fit >= 0.0 && tau_fit <= 1.0, "tau_fit must lie in [0, 1]");
  require(tau_occ > 0.0 && tau_occ < 1.0, "tau_occ must lie in (0, 1)");
  require(k_radar >= 1 && k_sat >= 1, "k_radar and k_sat must be at least 1");
  require(window_duration > 0.0, "window_duration must be positive");
  require(patch_size >= 2 && meters_per_pixel > 0.0, "patch_size >= 2 and meters_per_pixel > 0 required");
  require(coarse_trim_px >= 0.0, "coarse_trim_px must be non-negative");
  require(icp_max_iterations >= 1, "icp_max_iterations must be at least 1");
  require(icp_tol_translation > 0.0 && icp_tol_rotation > 0.0, "ICP tolerances must be positive");
  require(polar_azimuths >= 1 && polar_range_bins >= 1, "polar grid must be non-empty");
  require(prior_sigma_xy > 0.0 && prior_sigma_yaw_rad > 0.0, "prior sigmas must be positive");
  require(inject_odom_sigma_xy >= 0.0 && inject_odom_sigma_yaw_deg >= 0.0 && inject_sat_sigma_xy >= 0.0 &&
              inject_sat_sigma_yaw_deg >= 0.0,
          "injected sigmas must be non-negative");
  origin.validate();
}

IcpConfig PipelineConfig::odometry_icp() const {
  IcpConfig c;
  c.trim_distance = delta_radar;
  c.max_iterations = icp_max_iterations;
  c.translation_tolerance = icp_tol_translation;
  c.rotation_tolerance = icp_tol_rotation;
  return c;
}

IcpConfig PipelineConfig::overhead_icp() const {
  IcpConfig c = odometry_icp();
  c.trim_distance = delta_sat;
  if (coarse_iterations > 0 && coarse_trim_px > 0.0) c.coarse = CoarsePhase{coarse_trim_px * meters_per_pixel, coarse_iterations};
  return c;
}

WindowConfig PipelineConfig::window() const {
  WindowConfig w;
  w.window_duration = window_duration;
  w.odometry_noise = {sigma_odom_xy, sigma_odom_yaw_deg * kDegToRad};
  w.unary_noise = {sigma_sat_xy, sigma_sat_yaw_deg * kDegToRad};
  w.prior_sigma_xy = prior_sigma_xy;
  w.prior_sigma_yaw = prior_sigma_yaw_rad;
  w.tau_fit = tau_fit;
  return w;
}

std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base, std::vector<std::string>* overridden) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      set_config_value(base, key, trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
    if (overridden && std::find(overridden->begin(), overridden->end(), key) == overridden->end()) {
      overridden->push_back(key);
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base, std::vector<std::string>* overridden) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config: " + path.string());
  return parse_config(file, std::move(base), overridden);
}

SimulatedScans::SimulatedScans(const WorldMap& world, std::vector<TimedPose> trajectory, RadarSimConfig config,
                               std::uint64_t seed)
    : world_(world), trajectory_(std::move(trajectory)), config_(std::move(config)), seed_(seed) {
  config_.validate();
}

PolarScan SimulatedScans::at(std::size_t index) const {
  const TimedPose& p = trajectory_.at(index);
  return simulate_scan(world_, p.pose, config_, derive_seed(seed_, index), p.timestamp);
}

ScanDirectory::ScanDirectory(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) throw std::runtime_error("not a scan directory: " + directory.string());
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".rsc") files_.push_back(entry.path());
  }
  std::sort(files_.begin(), files_.end());
}

PolarScan ScanDirectory::at(std::size_t index) const { return read_scan(files_.at(index)); }

std::vector<TimedPose> LocalizationResult::trajectory() const {
  std::vector<TimedPose> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.timestamp, r.estimate});
  return out;
}

LocalizationResult run_localization(const ScanSequence& scans, const OccupancyImage& overhead,
                                    const PipelineConfig& config, const std::vector<TimedPose>* truth,
                                    const ScanObserver& observer) {
  config.validate();
  LocalizationResult result;
  result.manifest.config = config_entries(config);
  result.manifest.seed = config.seed;

  FactorGraphWindow window = initialize(config.origin, config.window());
  const IcpConfig odo_icp = config.odometry_icp();
  const IcpConfig sat_icp = config.overhead_icp();
  std::mt19937_64 odo_rng(derive_seed(config.seed, 0x0D0));
  std::mt19937_64 sat_rng(derive_seed(config.seed, 0x5A7));

  PointCloud2D previous_cloud;
  Pose2 previous_motion;
  double previous_time = -std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < scans.size(); ++k) {
    const PolarScan scan = scans.at(k);
    if (!(scan.timestamp() > previous_time)) {
      throw std::invalid_argument("run_localization: scan timestamps must be strictly increasing");
    }
    previous_time = scan.timestamp();
    ScanLog log;
    log.index = k;
    log.timestamp = scan.timestamp();

    PointCloud2D cloud = k_strongest(scan, config.k_radar);
    std::optional<Pose2> odometry;
    Pose2 predicted = origin_pose(config.origin);
    if (k > 0) {
      Pose2 motion = previous_motion;
      try {
        const IcpResult odo = icp(cloud, previous_cloud, previous_motion, odo_icp);
        log.odometry_fitness = odo.fitness;
        log.odometry_iterations = odo.iterations_used;
        if (odo.converged) {
          motion = odo.transform;
        } else {
          log.odometry_fallback = true;
        }
      } catch (const std::invalid_argument&) {
        log.odometry_fallback = true;
      }
      previous_motion = motion;
      odometry = perturb(motion, config.inject_odom_sigma_xy, config.inject_odom_sigma_yaw_deg * kDegToRad, odo_rng);
      log.odometry = *odometry;
      predicted = compose(window.latest().pose, *odometry);
    }
    previous_cloud = std::move(cloud);

    std::optional<UnaryMeasurement> unary;
    if (config.disable_unary) {
      log.unary_skip_reason = "disabled";
      log.fitness = std::numeric_limits<double>::quiet_NaN();
    } else {
      log.registration_attempted = true;
      const FetchedPatch patch = fetch_patch(overhead, predicted, config.patch_size, config.meters_per_pixel);
      log.patch_padded = patch.padded;
      const PolarGrid polar = to_polar(patch.image, config.polar_azimuths, config.polar_range_bins);
      const PointCloud2D target = raytrace_points(polar, config.tau_occ, polar.range_resolution);
      log.overhead_points = target.size();
      const PointCloud2D source = k_strongest(scan, config.k_sat);
      const Pose2 patch_origin = patch.image.origin();
      try {
        const IcpResult reg = icp(source, target, between(patch_origin, predicted), sat_icp);
        log.registration_converged = reg.converged;
        log.fitness = reg.fitness;
        log.gated = fitness_gate(reg, config.tau_fit);
        log.unary_measurement = compose(patch_origin, reg.transform);
      } catch (const std::invalid_argument&) {
        log.fitness = 0.0;
        log.unary_skip_reason = "registration_failed";
      }
      const bool blackout = static_cast<long>(k) >= config.unary_blackout_begin &&
                            static_cast<long>(k) < config.unary_blackout_end;
      if (log.gated) {
        const Pose2 measured = perturb(log.unary_measurement, config.inject_sat_sigma_xy,
                                       config.inject_sat_sigma_yaw_deg * kDegToRad, sat_rng);
        log.unary_measurement = measured;
        if (blackout) {
          log.unary_skip_reason = "blackout";
        } else {
          unary = UnaryMeasurement{measured, log.fitness};
        }
      } else if (log.unary_skip_reason.empty()) {
        log.unary_skip_reason = "gate_rejected";
      }
    }

    const OptimizeReport& report = window.advance(scan.timestamp(), odometry, unary);
    log.unary_added = unary.has_value();
    if (unary) result.unary_factors.push_back(window.graph().unary.back());
    log.optimizer_iterations = report.iterations;
    log.optimizer_converged = report.converged;
    log.optimizer_cost = report.final_cost;
    log.estimate = window.latest().pose;

    TrajectoryRow row;
    row.timestamp = scan.timestamp();
    row.estimate = log.estimate;
    row.fitness = log.fitness;
    row.gated = log.gated;
    if (truth) row.truth = interpolate_pose(*truth, scan.timestamp());
    result.rows.push_back(row);
    if (observer) observer(log, window);
    result.manifest.scans.push_back(std::move(log));
  }
  return result;
}

void write_localization_csv(const std::filesystem::path& path, const LocalizationResult& result) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << "t,x,y,theta,gt_x,gt_y,gt_theta,fitness,gated\n";
  char buf[512];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : result.rows) {
    const Pose2 gt = r.truth.value_or(Pose2());
    const bool has = r.truth.has_value();
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", r.timestamp, r.estimate.x(),
                  r.estimate.y(), r.estimate.theta(), has ? gt.x() : nan, has ? gt.y() : nan, has ? gt.theta() : nan,
                  r.fitness, r.gated ? 1 : 0);
    file << buf;
  }
  if (!file) throw std::runtime_error("write failed: " + path.string());
}

PreparedRun prepare_run(const Scenario& scenario) {
  PreparedRun run;
  run.world = build_world(scenario.preset, scenario.seed);
  run.trajectory = generate_trajectory(scenario.trajectory);
  run.radar = scenario.radar;
  const Point2 shift = -run.trajectory.front().pose.translation();
  if (shift.squaredNorm() > 0.0) {
    const Pose2& o = run.world.raster.origin();
    run.world.raster.set_origin(Pose2(o.x() + shift.x(), o.y() + shift.y(), o.theta()));
    for (auto& p : run.trajectory) {
      p.pose = Pose2(p.pose.x() + shift.x(), p.pose.y() + shift.y(), p.pose.theta());
    }
    for (auto& occ : run.radar.occluders) {
      occ.start = Pose2(occ.start.x() + shift.x(), occ.start.y() + shift.y(), occ.start.theta());
    }
    OverheadDegradation params = scenario.overhead;
    for (auto& box : params.dropout_regions) {
      box = {box.min_x + shift.x(), box.min_y + shift.y(), box.max_x + shift.x(), box.max_y + shift.y()};
    }
    run.overhead = degrade_overhead(run.world, params, derive_seed(scenario.seed, 2));
  } else {
    run.overhead = degrade_overhead(run.world, scenario.overhead, derive_seed(scenario.seed, 2));
  }
  run.scan_seed = derive_seed(scenario.seed, 1);
  return run;
}

SimulationSummary simulate_dataset(const Scenario& scenario, const GeoPoint& origin,
                                   const std::filesystem::path& out_dir) {
  const DatasetPaths paths{out_dir};
  std::filesystem::create_directories(paths.scans());
  const PreparedRun run = prepare_run(scenario);

  SimulationSummary summary;
  summary.scan_count = run.trajectory.size();
  summary.path_length = path_length(scenario.trajectory);

  const OccupancyLabels labels = simulate_labels(run.world, run.overhead, run.trajectory);
  summary.bce = masked_bce(run.overhead, labels);
  summary.dice = dice_loss(run.overhead, labels);
  summary.combined = combined_loss(run.overhead, labels);
  summary.masked_pixels = static_cast<std::size_t>(std::count(labels.mask.begin(), labels.mask.end(), 1));
  summary.bce_per_pixel = summary.masked_pixels ? summary.bce / static_cast<double>(summary.masked_pixels) : 0.0;
  double overhead_sum = 0.0;
  for (const double v : run.overhead.values()) overhead_sum += v;
  summary.overhead_mean = overhead_sum / static_cast<double>(std::max<std::size_t>(1, run.overhead.values().size()));
  summary.label_mean = static_cast<double>(std::count(labels.label.begin(), labels.label.end(), 1)) /
                       static_cast<double>(std::max<std::size_t>(1, labels.label.size()));

  write_occupancy(paths.overhead(), run.overhead, 16);
  write_occupancy(paths.world(), run.world.raster, 8);
  write_labels(paths.label(), paths.mask(), labels, run.overhead);
  write_trajectory_csv(paths.ground_truth(), run.trajectory);
  {
    std::ofstream cfg(paths.config(), std::ios::trunc);
    if (!cfg) throw std::runtime_error("cannot open for writing: " + paths.config().string());
    cfg << "origin_lat=" << format_double(origin.latitude_deg) << '\n';
    cfg << "origin_lon=" << format_double(origin.longitude_deg) << '\n';
    cfg << "origin_heading_deg=" << format_double(theta_to_heading(run.trajectory.front().pose.theta())) << '\n';
  }

  const SimulatedScans scans(run.world, run.trajectory, run.radar, run.scan_seed);
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const PolarScan scan = scans.at(i);
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.rsc", i);
    write_scan(paths.scans() / name, scan, choose_lossless_encoding(scan));
  }
  return summary;
}

}  // namespace radloc
