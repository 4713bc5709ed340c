#pragma once

#include <utility>
#include <vector>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Sum-average (SAVG) texture from the gray-level co-occurrence matrix,
// computed in a sliding window per pixel. Only the p_{x+y} marginal is
// needed, so the full co-occurrence matrix is never materialized in the
// map kernel; the explicit distribution exists for tests and callers.

struct GlcmParams {
    int levels = 32;
    int radius = 3;  // 7x7 window
    std::vector<std::pair<int, int>> offsets = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};  // (dy,dx)
    bool symmetric = true;

    void check() const {
        if (levels < 2 || levels > 256) throw std::invalid_argument("levels must be in [2,256]");
        if (radius < 1) throw std::invalid_argument("radius must be >= 1");
        if (offsets.empty()) throw std::invalid_argument("offsets must be non-empty");
        for (auto [dy, dx] : offsets)
            if (dy == 0 && dx == 0) throw std::invalid_argument("offset (0,0) not allowed");
    }
};

// v -> floor(v*levels/256); byte in [0,255] maps onto [0,levels-1].
// Nodata pixels map to level -1 via the companion mask overload below.
RasterBand quantize(const RasterBand& byte_band, int levels);

// p_{x+y}: distribution of level sums over co-occurring pairs.
struct SumDistribution {
    std::vector<double> p_sum;  // index s in [0, 2*(levels-1)]

    bool empty() const {
        for (double p : p_sum)
            if (p > 0.0) return false;
        return true;
    }
};

// Counts co-occurring level pairs at each offset over a w*h window
// (level < 0 marks invalid cells, pairs touching them are skipped),
// bins by s = a+b and normalizes. No valid pairs -> all-zero distribution.
SumDistribution sum_distribution(const std::vector<int>& window, int w, int h, int levels,
                                 const std::vector<std::pair<int, int>>& offsets, bool symmetric);

// Sum average: sum_s s*p(s). All-zero distribution -> NaN (nodata).
double savg(const SumDistribution& dist);

// Per-pixel SAVG over the (2r+1)^2 window centered on the pixel, computed
// per offset and averaged over the offsets that have valid pairs. Border
// pixels use clipped windows. valid_mask (optional) marks usable pixels;
// pixels that are themselves invalid come out as nodata.
RasterBand savg_map(const GridGeometry& grid, const RasterBand& byte_band,
                    const RasterBand* valid_mask, const GlcmParams& params, int tile = 256,
                    int workers = 1);

}  // namespace palmmap
