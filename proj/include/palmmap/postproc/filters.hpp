#pragma once

#include <vector>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Rule-based corrections applied to the voted oil-palm map.

// Zeroes positive pixels whose NDVI is below the floor or undefined.
// The floor is inclusive: NDVI == floor survives.
RasterBand ndvi_filter(const RasterBand& mask, const RasterBand& ndvi, double floor = 0.5);

// Pixel is masked iff masked in any input. Empty list -> all-clear mask.
RasterBand union_mask(size_t n_pixels, const std::vector<const RasterBand*>& masks);

// Horn 3x3 slope in degrees. dx_m/dy_m are the pixel sizes in meters
// (declared explicitly so geographic grids can state their scale).
// Borders use edge replication.
RasterBand slope_deg(const RasterBand& dem, int width, int height, double dx_m, double dy_m);

// 3x3 majority over the clipped neighborhood including the center, computed
// from the input image only; ties keep the input value. Nodata cells are
// excluded from counts and stay nodata.
RasterBand majority_fill(const RasterBand& mask, int width, int height);

// Variant that may only change pixels where `changeable` is 1 (used to
// restrict an extra gap-fill pass to steep slopes).
RasterBand majority_fill_where(const RasterBand& mask, int width, int height,
                               const std::vector<uint8_t>& changeable);

}  // namespace palmmap
