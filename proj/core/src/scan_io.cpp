#include "radloc/scan_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace radloc {
namespace {

static_assert(std::endian::native == std::endian::little, "scan container assumes a little-endian host");

constexpr char kMagic[4] = {'R', 'S', 'C', 'N'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 40;

template <typename T>
void put(std::vector<char>& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T take(const std::vector<char>& in, std::size_t& offset) {
  if (offset + sizeof(T) > in.size()) throw std::runtime_error("scan file truncated");
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

std::size_t nonzero_count(const PolarScan& scan) {
  std::size_t n = 0;
  for (const float v : scan.data()) n += (v != 0.0f);
  return n;
}

PolarScan read_csv_scan(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty scan file: " + path.string());
  if (!std::getline(in, line)) throw std::runtime_error("missing scan header values: " + path.string());
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream header(line);
  std::size_t azimuths = 0, bins = 0;
  double resolution = 0.0, timestamp = 0.0;
  if (!(header >> azimuths >> bins >> resolution >> timestamp)) {
    throw std::runtime_error("malformed scan header: " + path.string());
  }
  PolarScan scan(azimuths, bins, resolution, timestamp);
  for (std::size_t i = 0; i < azimuths; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("scan file truncated: " + path.string());
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    for (std::size_t j = 0; j < bins; ++j) {
      float v;
      if (!(row >> v)) throw std::runtime_error("scan row too short: " + path.string());
      if (!(v >= 0.0f)) throw std::runtime_error("negative or NaN intensity in " + path.string());
      scan.at(i, j) = v;
    }
  }
  return scan;
}

}  // namespace

ScanEncoding choose_lossless_encoding(const PolarScan& scan) {
  return nonzero_count(scan) * 8 < scan.data().size() * 4 ? ScanEncoding::kSparse : ScanEncoding::kFloat32;
}

void write_scan(const std::filesystem::path& path, const PolarScan& scan, ScanEncoding encoding,
                double uint8_scale) {
  std::vector<char> out;
  out.reserve(kHeaderBytes + scan.data().size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(encoding));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(scan.azimuth_count()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(scan.range_bin_count()));
  put<double>(out, scan.range_resolution());
  put<double>(out, scan.timestamp());
  put<double>(out, encoding == ScanEncoding::kUint8 ? uint8_scale : 1.0);

  switch (encoding) {
    case ScanEncoding::kFloat32:
      for (const float v : scan.data()) put<float>(out, v);
      break;
    case ScanEncoding::kUint8:
      if (!(uint8_scale > 0.0)) throw std::invalid_argument("write_scan: uint8 scale must be positive");
      for (const float v : scan.data()) {
        const double code = std::round(static_cast<double>(v) / uint8_scale);
        out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0))));
      }
      break;
    case ScanEncoding::kSparse: {
      put<std::uint64_t>(out, nonzero_count(scan));
      const auto data = scan.data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] != 0.0f) {
          put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
          put<float>(out, data[i]);
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("write_scan: unknown encoding");
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("write failed: " + path.string());
}

void write_scan_csv(const std::filesystem::path& path, const PolarScan& scan) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
  file << "azimuth_count,range_bin_count,range_resolution,timestamp\n";
  file << std::setprecision(17) << scan.azimuth_count() << ',' << scan.range_bin_count() << ','
       << scan.range_resolution() << ',' << scan.timestamp() << '\n';
  file << std::setprecision(9);
  for (std::size_t i = 0; i < scan.azimuth_count(); ++i) {
    const auto row = scan.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) file << ',';
      file << row[j];
    }
    file << '\n';
  }
}

PolarScan read_scan(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open scan file: " + path.string());
  std::vector<char> in((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0) {
    std::istringstream text(std::string(in.begin(), in.end()));
    return read_csv_scan(text, path);
  }

  std::size_t offset = 4;
  const auto version = take<std::uint16_t>(in, offset);
  if (version != kVersion) throw std::runtime_error("unsupported scan version in " + path.string());
  const auto encoding = static_cast<ScanEncoding>(take<std::uint16_t>(in, offset));
  const auto azimuths = take<std::uint32_t>(in, offset);
  const auto bins = take<std::uint32_t>(in, offset);
  const auto resolution = take<double>(in, offset);
  const auto timestamp = take<double>(in, offset);
  const auto scale = take<double>(in, offset);

  PolarScan scan(azimuths, bins, resolution, timestamp);
  auto data = scan.data();
  switch (encoding) {
    case ScanEncoding::kFloat32:
      for (auto& v : data) v = take<float>(in, offset);
      break;
    case ScanEncoding::kUint8:
      for (auto& v : data) {
        v = static_cast<float>(static_cast<double>(static_cast<std::uint8_t>(take<char>(in, offset))) * scale);
      }
      break;
    case ScanEncoding::kSparse: {
      const auto count = take<std::uint64_t>(in, offset);
      for (std::uint64_t n = 0; n < count; ++n) {
        const auto index = take<std::uint32_t>(in, offset);
        const auto value = take<float>(in, offset);
        if (index >= data.size()) throw std::runtime_error("sparse index out of range in " + path.string());
        data[index] = value;
      }
      break;
    }
    default:
      throw std::runtime_error("unknown scan encoding in " + path.string());
  }
  for (const float v : data) {
    if (!(v >= 0.0f)) throw std::runtime_error("negative or NaN intensity in " + path.string());
  }
  return scan;
}

}  // namespace radloc
