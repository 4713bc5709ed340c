#include "palmmap/classify/features.hpp"

namespace palmmap {

FeatureStack build_feature_stack(const Raster& composite, const Raster& textures) {
    if (!(composite.grid == textures.grid))
        throw std::invalid_argument("composite and texture rasters are not co-registered");

    FeatureStack stack;
    stack.grid = composite.grid;
    const size_t n = stack.grid.size();

    const RasterBand* bands[kNumFeatures];
    for (int f = 0; f < kNumFeatures; ++f) {
        const std::string name = kFeatureNames[f];
        bands[f] = composite.has_band(name) ? &composite.band(name) : &textures.band(name);
        stack.columns[f] = bands[f]->values;
    }

    stack.valid.assign(n, 1);
    const RasterBand* mask = composite.has_band("valid") ? &composite.band("valid") : nullptr;
    for (size_t i = 0; i < n; ++i) {
        bool ok = !mask || mask->values[i] == 1.0f;
        for (int f = 0; ok && f < kNumFeatures; ++f) ok = !bands[f]->is_nodata(bands[f]->values[i]);
        stack.valid[i] = ok ? 1 : 0;
    }
    return stack;
}

}  // namespace palmmap
