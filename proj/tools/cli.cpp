#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "radloc/evaluation.hpp"
#include "radloc/geodesy.hpp"
#include "radloc/pipeline.hpp"
#include "radloc/raster_io.hpp"
#include "radloc/simulator.hpp"

namespace radloc::cli {
namespace {

using nlohmann::ordered_json;

// Bad user input that maps to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kDefaultOriginLat = 43.7822;
constexpr double kDefaultOriginLon = -79.4661;

void write_json(const std::filesystem::path& path, const ordered_json& value) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << value.dump(2) << '\n';
  if (!file) throw std::runtime_error("write failed: " + path.string());
}

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw std::runtime_error("missing input file: " + path.string());
}

ordered_json pose_json(const Pose2& p) { return ordered_json::array({p.x(), p.y(), p.theta()}); }

// Waypoint CSV: header naming x and y, one waypoint per row.
std::vector<Point2> read_waypoints(const std::filesystem::path& path) {
  require_file(path);
  std::ifstream file(path);
  std::string line;
  std::getline(file, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      header.push_back(cell);
    }
  }
  const auto cx = std::find(header.begin(), header.end(), "x");
  const auto cy = std::find(header.begin(), header.end(), "y");
  if (cx == header.end() || cy == header.end()) throw UsageError("waypoint file needs x and y columns: " + path.string());
  const auto ix = static_cast<std::size_t>(cx - header.begin());
  const auto iy = static_cast<std::size_t>(cy - header.begin());
  std::vector<Point2> out;
  while (std::getline(file, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    try {
      out.emplace_back(std::stod(cells.at(ix)), std::stod(cells.at(iy)));
    } catch (const std::exception&) {
      throw UsageError("malformed waypoint row in " + path.string() + ": " + line);
    }
  }
  return out;
}

struct SimulateOptions {
  std::string preset = "corridor";
  std::uint64_t seed = 7;
  std::string trajectory;
  std::string out;
  double lat = kDefaultOriginLat;
  double lon = kDefaultOriginLon;
};

struct LocalizeOptions {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct EvaluateOptions {
  std::string estimate;
  std::string truth;
  std::string out;
  std::size_t bins = 50;
};

ordered_json summary_json(const SimulateOptions& opt, const SimulationSummary& s) {
  ordered_json j;
  j["preset"] = opt.preset;
  j["seed"] = opt.seed;
  j["origin"] = {{"latitude_deg", opt.lat}, {"longitude_deg", opt.lon}};
  j["scan_count"] = s.scan_count;
  j["path_length_m"] = s.path_length;
  j["labels"] = {{"masked_pixels", s.masked_pixels},
                 {"label_mean", s.label_mean},
                 {"overhead_mean", s.overhead_mean}};
  j["losses"] = {{"bce", s.bce}, {"bce_per_pixel", s.bce_per_pixel}, {"dice", s.dice}, {"combined", s.combined}};
  return j;
}

int do_simulate(const SimulateOptions& opt, std::ostream& out) {
  Scenario scenario;
  try {
    scenario = default_scenario(opt.preset, opt.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!opt.trajectory.empty()) scenario.trajectory.waypoints = read_waypoints(opt.trajectory);
  try {
    scenario.trajectory.validate();
    GeoReference{opt.lat, opt.lon, 0.0}.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::filesystem::path dir(opt.out);
  const SimulationSummary summary = simulate_dataset(scenario, {opt.lat, opt.lon}, dir);
  write_json(DatasetPaths{dir}.summary(), summary_json(opt, summary));
  out << "simulated " << summary.scan_count << " scans (" << opt.preset << ", seed " << opt.seed << ") into "
      << dir.string() << '\n';
  return kExitOk;
}

ordered_json scan_log_json(const ScanLog& log) {
  ordered_json j;
  j["index"] = log.index;
  j["timestamp"] = log.timestamp;
  j["odometry"] = pose_json(log.odometry);
  j["odometry_fallback"] = log.odometry_fallback;
  j["odometry_fitness"] = log.odometry_fitness;
  j["odometry_iterations"] = log.odometry_iterations;
  j["registration_attempted"] = log.registration_attempted;
  j["registration_converged"] = log.registration_converged;
  j["fitness"] = std::isfinite(log.fitness) ? ordered_json(log.fitness) : ordered_json(nullptr);
  j["overhead_points"] = log.overhead_points;
  j["patch_padded"] = log.patch_padded;
  j["gated"] = log.gated;
  j["unary_added"] = log.unary_added;
  j["unary_skip_reason"] = log.unary_skip_reason;
  j["unary_measurement"] = pose_json(log.unary_measurement);
  j["optimizer_iterations"] = log.optimizer_iterations;
  j["optimizer_converged"] = log.optimizer_converged;
  j["optimizer_cost"] = log.optimizer_cost;
  j["estimate"] = pose_json(log.estimate);
  return j;
}

ordered_json manifest_json(const RunManifest& m) {
  ordered_json j;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : m.config) config[k] = v;
  j["config"] = config;
  j["overrides"] = m.overrides;
  ordered_json hashes = ordered_json::object();
  for (const auto& [k, v] : m.input_hashes) hashes[k] = v;
  j["input_hashes"] = hashes;
  j["seed"] = m.seed;
  ordered_json scans = ordered_json::array();
  for (const auto& s : m.scans) scans.push_back(scan_log_json(s));
  j["scans"] = scans;
  return j;
}

// Digest over the per-file digests of every scan, in sequence order.
std::string scans_digest(const ScanDirectory& scans) {
  std::string joined;
  for (const auto& f : scans.files()) joined += f.filename().string() + ':' + sha256_file(f) + '\n';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(joined.data(), joined.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

int do_localize(const LocalizeOptions& opt, std::ostream& out) {
  const DatasetPaths data{opt.data};
  require_file(data.overhead());
  if (!std::filesystem::is_directory(data.scans())) throw std::runtime_error("missing scan directory: " + data.scans().string());

  PipelineConfig config;
  std::vector<std::string> overridden;
  try {
    if (std::filesystem::is_regular_file(data.config())) config = load_config(data.config(), config, &overridden);
    if (!opt.config.empty()) {
      require_file(opt.config);
      config = load_config(opt.config, config, &overridden);
    }
    if (opt.seed) {
      config.seed = *opt.seed;
      if (std::find(overridden.begin(), overridden.end(), "seed") == overridden.end()) overridden.push_back("seed");
    }
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const OccupancyImage overhead = read_occupancy(data.overhead());
  const ScanDirectory scans(data.scans());
  if (scans.size() == 0) throw std::runtime_error("no .rsc scans in " + data.scans().string());
  std::optional<std::vector<TimedPose>> truth;
  if (std::filesystem::is_regular_file(data.ground_truth())) truth = read_trajectory_csv(data.ground_truth());

  LocalizationResult result = run_localization(scans, overhead, config, truth ? &*truth : nullptr);
  result.manifest.overrides = overridden;
  result.manifest.input_hashes.emplace_back("overhead.pgm", sha256_file(data.overhead()));
  if (std::filesystem::is_regular_file(raster_meta_path(data.overhead()))) {
    result.manifest.input_hashes.emplace_back("overhead.meta", sha256_file(raster_meta_path(data.overhead())));
  }
  if (std::filesystem::is_regular_file(data.config())) {
    result.manifest.input_hashes.emplace_back("dataset.cfg", sha256_file(data.config()));
  }
  if (!opt.config.empty()) result.manifest.input_hashes.emplace_back("config", sha256_file(opt.config));
  result.manifest.input_hashes.emplace_back("scans", scans_digest(scans));

  const std::filesystem::path dir(opt.out);
  std::filesystem::create_directories(dir);
  write_localization_csv(dir / "trajectory.csv", result);
  write_json(dir / "manifest.json", manifest_json(result.manifest));
  const auto added = std::count_if(result.manifest.scans.begin(), result.manifest.scans.end(),
                                   [](const ScanLog& s) { return s.unary_added; });
  out << "localized " << result.rows.size() << " scans, " << added << " unary factors; wrote " << (dir / "trajectory.csv").string()
      << '\n';
  return kExitOk;
}

ordered_json histogram_json(const Histogram& h) {
  return {{"lower", h.lower}, {"upper", h.upper}, {"below", h.below}, {"above", h.above}, {"counts", h.counts}};
}

ordered_json metrics_json(const TrajectoryErrorReport& r) {
  ordered_json j;
  j["count"] = r.errors.size();
  j["skipped"] = r.skipped;
  j["rmse_translation_m"] = r.rmse_translation;
  j["rmse_lat_m"] = r.rmse_lat;
  j["rmse_long_m"] = r.rmse_long;
  j["rmse_yaw_deg"] = r.rmse_yaw;
  j["final_error_m"] = r.errors.empty() ? 0.0 : std::hypot(r.errors.back().lat, r.errors.back().lon);
  j["lat_histogram"] = histogram_json(r.lat_histogram);
  j["long_histogram"] = histogram_json(r.long_histogram);
  return j;
}

int do_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  require_file(opt.estimate);
  require_file(opt.truth);
  const auto estimate = read_trajectory_csv(opt.estimate);
  const auto truth = read_trajectory_csv(opt.truth);
  const TrajectoryErrorReport report = align_and_score(estimate, truth, opt.bins);
  const std::filesystem::path dir(opt.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "metrics.json", metrics_json(report));
  write_errors_csv(dir / "errors.csv", report);
  write_histogram_csv(dir / "histogram.csv", report);
  char line[256];
  std::snprintf(line, sizeof line, "rmse %.4f m (lat %.4f, long %.4f), yaw %.4f deg over %zu poses\n",
                report.rmse_translation, report.rmse_lat, report.rmse_long, report.rmse_yaw, report.errors.size());
  out << line;
  return kExitOk;
}

int do_demo(const SimulateOptions& sim, std::ostream& out) {
  const std::filesystem::path root(sim.out);
  SimulateOptions s = sim;
  s.out = (root / "data").string();
  do_simulate(s, out);
  LocalizeOptions loc;
  loc.data = s.out;
  loc.out = (root / "run").string();
  do_localize(loc, out);
  EvaluateOptions ev;
  ev.estimate = (root / "run" / "trajectory.csv").string();
  ev.truth = DatasetPaths{s.out}.ground_truth().string();
  ev.out = (root / "eval").string();
  return do_evaluate(ev, out);
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for hashing: " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 init failed");
  char buf[1 << 16];
  while (file) {
    file.read(buf, sizeof buf);
    if (file.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(file.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radar-to-overhead-imagery localization: simulate, localize, evaluate"};
  app.name(args.empty() ? "radloc" : std::filesystem::path(args.front()).filename().string());
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Write a simulated dataset (scans, overhead, labels, ground truth)");
  simulate->add_option("--preset", sim.preset, "World preset")->check(CLI::IsMember(world_presets()));
  simulate->add_option("--seed", sim.seed, "Run seed");
  simulate->add_option("--trajectory", sim.trajectory, "Waypoint CSV with x,y columns (replaces the preset path)");
  simulate->add_option("--lat", sim.lat, "Latitude of the map origin, degrees");
  simulate->add_option("--lon", sim.lon, "Longitude of the map origin, degrees");
  simulate->add_option("--out", sim.out, "Output dataset directory")->required();

  LocalizeOptions loc;
  auto* localize = app.add_subcommand("localize", "Run the localization pipeline over a dataset directory");
  localize->add_option("--config", loc.config, "key=value overrides applied after the dataset's dataset.cfg");
  localize->add_option("--data", loc.data, "Dataset directory written by simulate")->required();
  localize->add_option("--out", loc.out, "Output directory for trajectory.csv and manifest.json")->required();
  localize->add_option("--seed", loc.seed, "Overrides the config seed");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score an estimated trajectory against ground truth");
  evaluate->add_option("--estimate", ev.estimate, "Estimate CSV (t or timestamp, x, y, theta)")->required();
  evaluate->add_option("--truth", ev.truth, "Ground-truth CSV")->required();
  evaluate->add_option("--out", ev.out, "Output directory for metrics.json and plot CSVs")->required();
  evaluate->add_option("--bins", ev.bins, "Histogram bins")->check(CLI::PositiveNumber);

  SimulateOptions demo_opt;
  auto* demo = app.add_subcommand("demo", "simulate + localize + evaluate on a built-in preset");
  demo->add_option("--preset", demo_opt.preset, "World preset")->check(CLI::IsMember(world_presets()));
  demo->add_option("--seed", demo_opt.seed, "Run seed");
  demo->add_option("--out", demo_opt.out, "Output root (data/, run/, eval/)")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return do_simulate(sim, out);
    if (*localize) return do_localize(loc, out);
    if (*evaluate) return do_evaluate(ev, out);
    if (*demo) return do_demo(demo_opt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace radloc::cli
