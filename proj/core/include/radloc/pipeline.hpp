#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radloc/geodesy.hpp"
#include "radloc/occupancy.hpp"
#include "radloc/radar_scan.hpp"
#include "radloc/registration.hpp"
#include "radloc/simulator.hpp"
#include "radloc/smoother.hpp"

namespace radloc {

/// Every tunable of the localization loop. Defaults are the published
/// parameter table plus the window, patch and ICP settings.
struct PipelineConfig {
  double sigma_odom_xy = 0.04;       // m
  double sigma_odom_yaw_deg = 0.1;
  double sigma_sat_xy = 0.5;         // m
  double sigma_sat_yaw_deg = 4.5;
  double delta_sat = 4.33;           // m, fine trim for overhead registration
  double delta_radar = 4.0;          // m, trim for odometry
  double tau_fit = 0.6;
  std::size_t k_radar = 5;
  std::size_t k_sat = 9;
  double tau_occ = 0.6;

  double window_duration = 10.0;     // s
  std::size_t patch_size = kDefaultPatchSize;
  double meters_per_pixel = kOverheadMetersPerPixel;
  double coarse_trim_px = 50.0;
  std::size_t coarse_iterations = 5;
  std::size_t icp_max_iterations = 50;
  double icp_tol_translation = 1e-4;  // m
  double icp_tol_rotation = 1e-5;     // rad
  std::size_t polar_azimuths = kDefaultAzimuthCount;
  std::size_t polar_range_bins = kDefaultPatchSize / 2;
  double prior_sigma_xy = 0.01;       // m
  double prior_sigma_yaw_rad = 0.01;
  GeoReference origin;

  // Seeded measurement perturbations, zero by default.
  double inject_odom_sigma_xy = 0.0;
  double inject_odom_sigma_yaw_deg = 0.0;
  double inject_sat_sigma_xy = 0.0;
  double inject_sat_sigma_yaw_deg = 0.0;
  // Scans with index in [begin, end) add no unary factor.
  long unary_blackout_begin = -1;
  long unary_blackout_end = -1;
  bool disable_unary = false;
  std::uint64_t seed = 0;

  void validate() const;
  IcpConfig odometry_icp() const;
  IcpConfig overhead_icp() const;
  WindowConfig window() const;
};

/// Ordered (key, value) pairs covering every field; doubles use the shortest
/// round-trip form so a pass through parse_config is exact.
std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& config);

/// Sets one field from text. Throws std::invalid_argument for an unknown key
/// or a malformed value.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

/// key=value lines; '#' starts a comment, blank lines are skipped. Keys are
/// applied on top of `base` and appended to `overridden` when given.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {}, std::vector<std::string>* overridden = nullptr);
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {},
                           std::vector<std::string>* overridden = nullptr);

/// Random-access scan source; the loop reads scans one at a time.
class ScanSequence {
 public:
  virtual ~ScanSequence() = default;
  virtual std::size_t size() const = 0;
  virtual PolarScan at(std::size_t index) const = 0;
};

class ScanVector : public ScanSequence {
 public:
  explicit ScanVector(std::vector<PolarScan> scans) : scans_(std::move(scans)) {}
  std::size_t size() const override { return scans_.size(); }
  PolarScan at(std::size_t index) const override { return scans_.at(index); }

 private:
  std::vector<PolarScan> scans_;
};

/// Scans ray-cast on demand along a trajectory; scan i uses
/// derive_seed(seed, i) and the trajectory timestamp.
class SimulatedScans : public ScanSequence {
 public:
  SimulatedScans(const WorldMap& world, std::vector<TimedPose> trajectory, RadarSimConfig config, std::uint64_t seed);
  std::size_t size() const override { return trajectory_.size(); }
  PolarScan at(std::size_t index) const override;

 private:
  const WorldMap& world_;
  std::vector<TimedPose> trajectory_;
  RadarSimConfig config_;
  std::uint64_t seed_;
};

/// The `*.rsc` files of a directory in lexicographic order.
class ScanDirectory : public ScanSequence {
 public:
  explicit ScanDirectory(const std::filesystem::path& directory);
  std::size_t size() const override { return files_.size(); }
  PolarScan at(std::size_t index) const override;
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
};

struct ScanLog {
  std::size_t index = 0;
  double timestamp = 0.0;
  Pose2 odometry;                    // measurement added to the graph
  bool odometry_fallback = false;    // ICP failed; previous relative motion reused
  double odometry_fitness = 0.0;
  std::size_t odometry_iterations = 0;
  bool registration_attempted = false;
  bool registration_converged = false;
  double fitness = 0.0;
  std::size_t overhead_points = 0;
  bool patch_padded = false;
  bool gated = false;                // fitness_gate decision
  bool unary_added = false;
  std::string unary_skip_reason;     // empty when added
  Pose2 unary_measurement;
  std::size_t optimizer_iterations = 0;
  bool optimizer_converged = false;
  double optimizer_cost = 0.0;
  Pose2 estimate;
};

/// Everything needed to reproduce and audit a run. Input hashes are filled in
/// by the caller that opened the files.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> overrides;
  std::vector<std::pair<std::string, std::string>> input_hashes;
  std::uint64_t seed = 0;
  std::vector<ScanLog> scans;
};

struct TrajectoryRow {
  double timestamp = 0.0;
  Pose2 estimate;
  std::optional<Pose2> truth;
  double fitness = 0.0;
  bool gated = false;
};

struct LocalizationResult {
  std::vector<TrajectoryRow> rows;
  RunManifest manifest;
  std::vector<UnaryFactor> unary_factors;  // every unary factor ever added

  std::vector<TimedPose> trajectory() const;
};

/// Per-scan hook, called after the window update.
using ScanObserver = std::function<void(const ScanLog&, const FactorGraphWindow&)>;

/// Odometry ICP against the previous scan, overhead registration against the
/// patch fetched at the odometry prediction, fitness gate, window update.
/// Emits the latest estimate after each scan. `truth`, when given, is
/// interpolated into the rows. Throws std::invalid_argument for an invalid
/// config or non-increasing scan timestamps.
LocalizationResult run_localization(const ScanSequence& scans, const OccupancyImage& overhead,
                                    const PipelineConfig& config, const std::vector<TimedPose>* truth = nullptr,
                                    const ScanObserver& observer = {});

/// Columns t,x,y,theta,gt_x,gt_y,gt_theta,fitness,gated with %.9g; missing
/// truth prints nan.
void write_localization_csv(const std::filesystem::path& path, const LocalizationResult& result);

/// Files of a simulated dataset directory.
struct DatasetPaths {
  std::filesystem::path root;

  std::filesystem::path scans() const { return root / "scans"; }
  std::filesystem::path overhead() const { return root / "overhead.pgm"; }
  std::filesystem::path world() const { return root / "world.pgm"; }
  std::filesystem::path label() const { return root / "label.pgm"; }
  std::filesystem::path mask() const { return root / "mask.pgm"; }
  std::filesystem::path ground_truth() const { return root / "groundtruth.csv"; }
  std::filesystem::path config() const { return root / "dataset.cfg"; }
  std::filesystem::path summary() const { return root / "summary.json"; }
};

struct SimulationSummary {
  std::size_t scan_count = 0;
  double path_length = 0.0;
  double bce = 0.0;
  double dice = 0.0;
  double combined = 0.0;
  std::size_t masked_pixels = 0;
  double bce_per_pixel = 0.0;
  double overhead_mean = 0.0;
  double label_mean = 0.0;
};

/// World, degraded overhead and ground truth of a scenario, translated so the
/// first pose sits at the map origin. Scans come from
/// SimulatedScans(world, trajectory, scenario.radar, scan_seed) with the
/// occluders translated the same way.
struct PreparedRun {
  WorldMap world;
  OccupancyImage overhead;
  std::vector<TimedPose> trajectory;
  RadarSimConfig radar;
  std::uint64_t scan_seed = 0;
};

PreparedRun prepare_run(const Scenario& scenario);

/// Writes scans (lossless encoding per scan), degraded overhead, world raster,
/// labels, ground truth and dataset.cfg. The origin heading in dataset.cfg
/// comes from the first ground-truth pose.
SimulationSummary simulate_dataset(const Scenario& scenario, const GeoPoint& origin,
                                   const std::filesystem::path& out_dir);

}  // namespace radloc
