#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "radloc/radar_scan.hpp"

namespace radloc {

/// Payload encodings of the binary `.rsc` scan container. The layout is
/// documented in docs/file_formats.md.
enum class ScanEncoding : std::uint16_t {
  kFloat32 = 0,  // dense little-endian float32, lossless
  kUint8 = 1,    // dense bytes, intensity = code * scale
  kSparse = 2,   // (uint32 flat index, float32 value) for each non-zero bin
};

/// Picks kSparse when it is smaller than kFloat32, else kFloat32.
ScanEncoding choose_lossless_encoding(const PolarScan& scan);

void write_scan(const std::filesystem::path& path, const PolarScan& scan,
                ScanEncoding encoding = ScanEncoding::kFloat32, double uint8_scale = 1.0 / 200.0);

/// Text form: a header line "azimuth_count,range_bin_count,range_resolution,timestamp",
/// the matching values, then one comma-separated row per azimuth.
void write_scan_csv(const std::filesystem::path& path, const PolarScan& scan);

/// Reads either container; the binary form is recognized by its magic bytes.
PolarScan read_scan(const std::filesystem::path& path);

}  // namespace radloc
