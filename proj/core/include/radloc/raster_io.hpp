#pragma once

#include <filesystem>

#include "radloc/occupancy.hpp"

namespace radloc {

/// Sidecar path for a raster: same stem, `.meta` extension.
std::filesystem::path raster_meta_path(const std::filesystem::path& image_path);

/// Writes a binary PGM (P5) with maxval 255 (bits = 8) or 65535 (bits = 16,
/// big-endian samples) and the key=value sidecar holding resolution and origin.
void write_occupancy(const std::filesystem::path& image_path, const OccupancyImage& image, int bits = 16);

/// Reads a PGM written by write_occupancy (or any P5 grayscale) and its sidecar.
/// Sample values are divided by maxval.
OccupancyImage read_occupancy(const std::filesystem::path& image_path);

/// Binary label and mask grids as 8-bit PGMs holding 0 or 255. The label
/// raster gets a sidecar copied from `georef`.
void write_labels(const std::filesystem::path& label_path, const std::filesystem::path& mask_path,
                  const OccupancyLabels& labels, const OccupancyImage& georef);
OccupancyLabels read_labels(const std::filesystem::path& label_path, const std::filesystem::path& mask_path);

}  // namespace radloc
