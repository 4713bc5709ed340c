#pragma once

#include <optional>
#include <string>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// GeoTIFF I/O. One TIFF directory per band: tiled, deflate-compressed,
// with pixel scale / tiepoint / EPSG geokeys, GDAL-style nodata, the band
// name in PageName and the unit recorded in ImageDescription.
//
// Sample types are fixed per unit (see unit_sample_type). Writing is
// single-threaded and produces identical bytes for identical inputs.

void write_raster(const std::string& path, const Raster& raster);

// Reads all bands. If expected_unit is given it is applied to bands whose
// files carry no unit metadata and cross-checked against those that do.
// Values outside the unit's legal domain raise std::runtime_error.
Raster read_raster(const std::string& path, std::optional<Unit> expected_unit = std::nullopt);

}  // namespace palmmap
