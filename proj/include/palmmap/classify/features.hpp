#pragma once

#include <array>
#include <vector>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// The six classification features: yearly VV/VH/difference means plus the
// SAVG texture of each.
inline constexpr int kNumFeatures = 6;
inline const std::array<const char*, kNumFeatures> kFeatureNames = {
    "vv_mean", "vh_mean", "vhvv_diff", "savg_vv_byte", "savg_vh_byte", "savg_diff_byte"};

using FeatureVector = std::array<float, kNumFeatures>;

// Column views over the composite + texture rasters. valid marks pixels
// where all six features are defined.
struct FeatureStack {
    GridGeometry grid;
    std::array<std::vector<float>, kNumFeatures> columns;
    std::vector<uint8_t> valid;

    bool get(size_t i, FeatureVector& out) const {
        if (!valid[i]) return false;
        for (int f = 0; f < kNumFeatures; ++f) out[f] = columns[f][i];
        return true;
    }
};

FeatureStack build_feature_stack(const Raster& composite, const Raster& textures);

}  // namespace palmmap
