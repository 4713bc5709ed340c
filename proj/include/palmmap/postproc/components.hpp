#pragma once

#include <cstdint>
#include <vector>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Two-pass 8-connected component labeling of positive pixels.
// Returns labels (0 = background) and the component count.
std::pair<std::vector<int32_t>, int> label_components(const RasterBand& mask, int width,
                                                      int height);

// Removes 8-connected positive components whose area (pixel count *
// pixel_area_m2) is strictly below min_area_m2; components exactly at the
// minimum are kept.
RasterBand enforce_mmu(const RasterBand& mask, int width, int height, double pixel_area_m2,
                       double min_area_m2 = 900.0);

}  // namespace palmmap
