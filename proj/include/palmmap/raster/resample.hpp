#pragma once

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Nearest-neighbor resampling of a band onto a target grid in the same CRS.
// The only class-safe resampler for categorical data; also used to align
// 10 m radar with ~30 m optical products. Target pixels whose center falls
// outside the source extent become nodata.
RasterBand resample_nearest(const GridGeometry& src_grid, const RasterBand& src,
                            const GridGeometry& dst_grid);

}  // namespace palmmap
