#include "radloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace radloc {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kTimeSlack = 1e-9;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  return file;
}

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

std::optional<Pose2> interpolate_pose(const std::vector<TimedPose>& truth, double t) {
  if (truth.empty() || t < truth.front().timestamp - kTimeSlack || t > truth.back().timestamp + kTimeSlack) {
    return std::nullopt;
  }
  const auto upper = std::lower_bound(truth.begin(), truth.end(), t,
                                      [](const TimedPose& p, double v) { return p.timestamp < v; });
  if (upper == truth.begin()) return truth.front().pose;
  if (upper == truth.end()) return truth.back().pose;
  const TimedPose& a = *(upper - 1);
  const TimedPose& b = *upper;
  const double alpha = (t - a.timestamp) / (b.timestamp - a.timestamp);
  const double dtheta = normalize_angle(b.pose.theta() - a.pose.theta());
  return Pose2(a.pose.x() + alpha * (b.pose.x() - a.pose.x()), a.pose.y() + alpha * (b.pose.y() - a.pose.y()),
               a.pose.theta() + alpha * dtheta);
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.empty() || bins == 0) return h;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / static_cast<double>(values.size()));
  const double half = sigma > 0.0 ? 3.0 * sigma : 0.5;
  h.lower = mean - half;
  h.upper = mean + half;
  const double width = h.bin_width();
  for (const double v : values) {
    if (v < h.lower) {
      ++h.below;
    } else if (v >= h.upper) {
      ++h.above;
    } else {
      const auto bin = std::min(bins - 1, static_cast<std::size_t>((v - h.lower) / width));
      ++h.counts[bin];
    }
  }
  return h;
}

TrajectoryErrorReport align_and_score(const std::vector<TimedPose>& estimated, const std::vector<TimedPose>& truth,
                                      std::size_t histogram_bins) {
  for (std::size_t i = 1; i < truth.size(); ++i) {
    if (!(truth[i].timestamp > truth[i - 1].timestamp)) {
      throw std::invalid_argument("align_and_score: ground-truth timestamps must be strictly increasing");
    }
  }
  TrajectoryErrorReport report;
  double sum_lat = 0.0;
  double sum_long = 0.0;
  double sum_yaw = 0.0;
  for (const auto& est : estimated) {
    const auto gt = interpolate_pose(truth, est.timestamp);
    if (!gt) {
      ++report.skipped;
      continue;
    }
    ErrorSample e;
    e.timestamp = est.timestamp;
    e.lat = est.pose.y() - gt->y();
    e.lon = est.pose.x() - gt->x();
    e.yaw_deg = std::abs(normalize_angle(est.pose.theta() - gt->theta())) * kRadToDeg;
    sum_lat += e.lat * e.lat;
    sum_long += e.lon * e.lon;
    sum_yaw += e.yaw_deg * e.yaw_deg;
    report.errors.push_back(e);
  }
  if (report.errors.empty()) throw std::invalid_argument("align_and_score: estimate and ground truth do not overlap");
  const double n = static_cast<double>(report.errors.size());
  report.rmse_lat = std::sqrt(sum_lat / n);
  report.rmse_long = std::sqrt(sum_long / n);
  report.rmse_translation = std::sqrt((sum_lat + sum_long) / n);
  report.rmse_yaw = std::sqrt(sum_yaw / n);
  std::vector<double> lat;
  std::vector<double> lon;
  for (const auto& e : report.errors) {
    lat.push_back(e.lat);
    lon.push_back(e.lon);
  }
  report.lat_histogram = make_histogram(lat, histogram_bins);
  report.long_histogram = make_histogram(lon, histogram_bins);
  return report;
}

std::vector<TimedPose> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open trajectory: " + path.string());
  std::string line;
  if (!std::getline(file, line)) throw std::runtime_error("empty trajectory file: " + path.string());
  const auto header = split_csv(line);
  const auto column = [&](std::initializer_list<const char*> names) -> std::size_t {
    for (const char* name : names) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    }
    throw std::runtime_error("trajectory header lacks column '" + std::string(*names.begin()) + "': " + path.string());
  };
  const std::size_t ct = column({"t", "timestamp"});
  const std::size_t cx = column({"x"});
  const std::size_t cy = column({"y"});
  const std::size_t cth = column({"theta"});
  const std::size_t needed = std::max({ct, cx, cy, cth}) + 1;
  std::vector<TimedPose> out;
  std::size_t line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() < needed) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": too few columns");
    }
    try {
      out.push_back({std::stod(cells[ct]), Pose2(std::stod(cells[cx]), std::stod(cells[cy]), std::stod(cells[cth]))});
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TimedPose>& trajectory) {
  auto file = open_out(path);
  file << "timestamp,x,y,theta\n";
  for (const auto& p : trajectory) {
    file << format_g(p.timestamp, 17) << ',' << format_g(p.pose.x(), 17) << ',' << format_g(p.pose.y(), 17) << ','
         << format_g(p.pose.theta(), 17) << '\n';
  }
}

void write_errors_csv(const std::filesystem::path& path, const TrajectoryErrorReport& report) {
  auto file = open_out(path);
  file << "time,lat,long,yaw_deg\n";
  for (const auto& e : report.errors) {
    file << format_g(e.timestamp, 12) << ',' << format_g(e.lat, 9) << ',' << format_g(e.lon, 9) << ','
         << format_g(e.yaw_deg, 9) << '\n';
  }
}

void write_histogram_csv(const std::filesystem::path& path, const TrajectoryErrorReport& report) {
  auto file = open_out(path);
  file << "axis,bin_lower,bin_upper,count\n";
  const auto emit = [&file](const char* axis, const Histogram& h) {
    file << axis << ",-inf," << format_g(h.lower, 9) << ',' << h.below << '\n';
    const double w = h.bin_width();
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      file << axis << ',' << format_g(h.lower + w * static_cast<double>(i), 9) << ','
           << format_g(h.lower + w * static_cast<double>(i + 1), 9) << ',' << h.counts[i] << '\n';
    }
    file << axis << ',' << format_g(h.upper, 9) << ",inf," << h.above << '\n';
  };
  emit("lat", report.lat_histogram);
  emit("long", report.long_histogram);
}

}  // namespace radloc
