#include "radloc/raster_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace radloc {
namespace {

struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<unsigned> samples;
};

void write_pgm(const std::filesystem::path& path, const Pgm& pgm) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << "P5\n" << pgm.width << ' ' << pgm.height << '\n' << pgm.maxval << '\n';
  std::vector<char> bytes;
  bytes.reserve(pgm.samples.size() * (pgm.maxval > 255 ? 2 : 1));
  for (const unsigned s : pgm.samples) {
    if (pgm.maxval > 255) bytes.push_back(static_cast<char>((s >> 8) & 0xff));
    bytes.push_back(static_cast<char>(s & 0xff));
  }
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("write failed: " + path.string());
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

Pgm read_pgm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open raster: " + path.string());
  if (next_token(file) != "P5") throw std::runtime_error("not a binary PGM (P5): " + path.string());
  Pgm pgm;
  try {
    pgm.width = std::stoul(next_token(file));
    pgm.height = std::stoul(next_token(file));
    pgm.maxval = static_cast<unsigned>(std::stoul(next_token(file)));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PGM header: " + path.string());
  }
  if (pgm.maxval == 0 || pgm.maxval > 65535) throw std::runtime_error("bad PGM maxval: " + path.string());
  const std::size_t count = pgm.width * pgm.height;
  const std::size_t bytes_per = pgm.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> bytes(count * bytes_per);
  file.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(file.gcount()) != bytes.size()) throw std::runtime_error("PGM truncated: " + path.string());
  pgm.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    pgm.samples[i] = bytes_per == 2 ? (static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1] : bytes[i];
    if (pgm.samples[i] > pgm.maxval) throw std::runtime_error("PGM sample exceeds maxval: " + path.string());
  }
  return pgm;
}

void write_meta(const std::filesystem::path& path, const OccupancyImage& image) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << std::setprecision(17);
  file << "meters_per_pixel=" << image.meters_per_pixel() << '\n';
  file << "origin_x=" << image.origin().x() << '\n';
  file << "origin_y=" << image.origin().y() << '\n';
  file << "origin_theta=" << image.origin().theta() << '\n';
}

std::map<std::string, double> read_meta(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("missing raster sidecar: " + path.string());
  std::map<std::string, double> values;
  std::string line;
  while (std::getline(file, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed sidecar line in " + path.string() + ": " + line);
    const std::string key = line.substr(0, eq);
    if (key != "meters_per_pixel" && key != "origin_x" && key != "origin_y" && key != "origin_theta") {
      throw std::runtime_error("unknown sidecar key '" + key + "' in " + path.string());
    }
    try {
      values[key] = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("bad sidecar value for '" + key + "' in " + path.string());
    }
  }
  if (!values.count("meters_per_pixel")) throw std::runtime_error("sidecar lacks meters_per_pixel: " + path.string());
  return values;
}

}  // namespace

std::filesystem::path raster_meta_path(const std::filesystem::path& image_path) {
  auto meta = image_path;
  meta.replace_extension(".meta");
  return meta;
}

void write_occupancy(const std::filesystem::path& image_path, const OccupancyImage& image, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("write_occupancy: bits must be 8 or 16");
  Pgm pgm;
  pgm.width = image.width();
  pgm.height = image.height();
  pgm.maxval = bits == 16 ? 65535 : 255;
  pgm.samples.reserve(image.values().size());
  for (const double v : image.values()) {
    pgm.samples.push_back(static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * pgm.maxval)));
  }
  write_pgm(image_path, pgm);
  write_meta(raster_meta_path(image_path), image);
}

OccupancyImage read_occupancy(const std::filesystem::path& image_path) {
  const Pgm pgm = read_pgm(image_path);
  const auto meta = read_meta(raster_meta_path(image_path));
  const auto get = [&meta](const char* key) { return meta.count(key) ? meta.at(key) : 0.0; };
  OccupancyImage image(pgm.width, pgm.height, meta.at("meters_per_pixel"),
                       Pose2(get("origin_x"), get("origin_y"), get("origin_theta")));
  for (std::size_t i = 0; i < pgm.samples.size(); ++i) {
    image.values()[i] = static_cast<double>(pgm.samples[i]) / static_cast<double>(pgm.maxval);
  }
  return image;
}

void write_labels(const std::filesystem::path& label_path, const std::filesystem::path& mask_path,
                  const OccupancyLabels& labels, const OccupancyImage& georef) {
  labels.validate();
  Pgm pgm;
  pgm.width = labels.width;
  pgm.height = labels.height;
  pgm.maxval = 255;
  pgm.samples.assign(labels.label.begin(), labels.label.end());
  for (auto& s : pgm.samples) s *= 255;
  write_pgm(label_path, pgm);
  pgm.samples.assign(labels.mask.begin(), labels.mask.end());
  for (auto& s : pgm.samples) s *= 255;
  write_pgm(mask_path, pgm);
  write_meta(raster_meta_path(label_path), georef);
}

OccupancyLabels read_labels(const std::filesystem::path& label_path, const std::filesystem::path& mask_path) {
  const Pgm label = read_pgm(label_path);
  const Pgm mask = read_pgm(mask_path);
  if (label.width != mask.width || label.height != mask.height) {
    throw std::runtime_error("label and mask rasters differ in size");
  }
  OccupancyLabels labels(label.width, label.height);
  for (std::size_t i = 0; i < label.samples.size(); ++i) {
    labels.label[i] = 2 * label.samples[i] >= label.maxval ? 1 : 0;
    labels.mask[i] = 2 * mask.samples[i] >= mask.maxval ? 1 : 0;
  }
  return labels;
}

}  // namespace radloc
